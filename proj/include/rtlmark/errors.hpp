// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rtlmark {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourcePos {
  size_t offset = 0;
  int line = 1;
  int col = 1;
};

class ParseError : public Error {
 public:
  ParseError(std::string origin, SourcePos pos, std::string message,
             std::vector<std::string> expected = {})
      : Error(format(origin, pos, message)),
        origin_(std::move(origin)),
        pos_(pos),
        message_(std::move(message)),
        expected_(std::move(expected)) {}

  const std::string& origin() const { return origin_; }
  SourcePos position() const { return pos_; }
  const std::string& message() const { return message_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(const std::string& origin, SourcePos pos, const std::string& msg) {
    return origin + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg;
  }

  std::string origin_;
  SourcePos pos_;
  std::string message_;
  std::vector<std::string> expected_;
};

/// A transformation site no longer resolves in the Ast it is applied to.
class SiteStale : public Error {
 public:
  using Error::Error;
};

class UnsupportedConstruct : public Error {
 public:
  using Error::Error;
};

class InsufficientCapacity : public Error {
 public:
  InsufficientCapacity(double achieved, size_t applicable)
      : Error("insufficient watermark capacity: achieved confidence " + std::to_string(achieved) +
              " with " + std::to_string(applicable) + " applicable sites"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class PayloadTooLarge : public Error {
 public:
  using Error::Error;
};

class BadFraming : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class ToolMissing : public Error {
 public:
  using Error::Error;
};

class ToolFailed : public Error {
 public:
  ToolFailed(int exit_code, std::string stderr_excerpt)
      : Error("synthesis tool failed with exit code " + std::to_string(exit_code) + ": " +
              stderr_excerpt),
        exit_code_(exit_code),
        stderr_(std::move(stderr_excerpt)) {}
  int exit_code() const { return exit_code_; }
  const std::string& stderr_excerpt() const { return stderr_; }

 private:
  int exit_code_;
  std::string stderr_;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

}  // namespace rtlmark
