// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rtlmark/bitvec.hpp"
#include "rtlmark/verilog/ast.hpp"

namespace rtlmark {

struct PortInfo {
  std::string name;
  int width = 1;
  vlog::Direction dir = vlog::Direction::Input;
};

/// Inputs applied at one step; unspecified inputs keep their value.
using InputVector = std::map<std::string, BitVec>;
/// Output values observed after one step settles.
using OutputVector = std::map<std::string, BitVec>;

/// Cycle-accurate simulator for one module of the supported subset.
///
/// A step applies new input values, settles combinational logic, runs the
/// edge-triggered blocks whose events fired, commits nonblocking updates,
/// and repeats until quiet. Registers start unknown. Always blocks with a
/// level-sensitive event list run as combinational logic.
class Simulator {
 public:
  Simulator(const vlog::Ast& ast, const std::string& module);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const std::vector<PortInfo>& inputs() const;
  const std::vector<PortInfo>& outputs() const;
  /// Input ports used as edge events: clocks and asynchronous resets.
  const std::vector<std::string>& edge_inputs() const;
  bool is_sequential() const;

  void step(const InputVector& in);
  OutputVector outputs_now() const;
  BitVec value(const std::string& name) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs `stimulus` from the initial state and records outputs after each step.
std::vector<OutputVector> simulate(const vlog::Ast& ast, const std::string& module,
                                   const std::vector<InputVector>& stimulus);

}  // namespace rtlmark
