// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/symbols.hpp"

namespace rtlmark {

/// A state machine whose encoding can be rewritten by changing only the
/// state constants and the width of the state registers.
///
/// State registers are closed under plain register-to-register copies.
/// State constants are body parameters with sized literal values, used
/// only as case labels, as right-hand sides of state-register
/// assignments, or in (in)equality tests against state registers.
struct StateMachine {
  std::vector<std::string> vars;    // state registers; vars[0] is a case subject
  std::vector<std::string> states;  // state constants in declaration order
  std::map<std::string, BitVec> values;
  std::set<std::string> assigned;   // constants some state register can take
  int width = 0;
  /// Case statements over a state register, in source order.
  std::vector<const vlog::Stmt*> cases;

  bool is_one_hot() const;
};

std::vector<StateMachine> find_state_machines(const vlog::Ast& ast, const vlog::ModuleDecl& m,
                                              const vlog::ModuleSymbols& syms);

}  // namespace rtlmark
