// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/ast.hpp"

namespace rtlmark::vlog {

struct LexOptions {
  /// Treat "(* ... *)" attribute instances as trivia (structural netlists).
  bool skip_attributes = false;
};

/// Splits Verilog source into tokens. Every token records the trivia
/// (whitespace and comments) preceding it, so the concatenation of
/// trivia and token text over the stream reproduces the input exactly.
std::vector<Token> lex(const std::string& source, const std::string& origin,
                       LexOptions opts = {});

SourcePos position_of(const std::string& source, size_t offset);

/// Comments contained in a trivia span.
std::vector<Comment> comments_in(const std::string& source, Span trivia);

NumberLiteral parse_number(std::string_view spelling);

}  // namespace rtlmark::vlog
