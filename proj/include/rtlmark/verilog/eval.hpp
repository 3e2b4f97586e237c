// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "rtlmark/bitvec.hpp"
#include "rtlmark/verilog/ast.hpp"

namespace rtlmark::vlog {

/// A named value as seen by expressions: its bits plus the declared index
/// range ([left:right]) used to resolve selects.
struct SignalValue {
  BitVec value;
  bool is_signed = false;
  int left = 0;
  int right = 0;

  /// Bit offset of declared index `i` inside `value`, or nullopt when out of range.
  std::optional<int> offset_of(int64_t i) const;
};

using Lookup = std::function<const SignalValue*(const std::string&)>;

/// Evaluates expressions with Verilog-2005 sizing: context-determined
/// operands widen to the largest width in the expression, comparisons and
/// logical operators yield one bit, and unknown bits propagate.
class Evaluator {
 public:
  explicit Evaluator(Lookup lookup) : lookup_(std::move(lookup)) {}

  /// Value in its self-determined width and signedness.
  BitVec eval(const Expr& e) const;
  /// Value evaluated in an assignment context of `width` bits.
  BitVec eval_sized(const Expr& e, int width) const;

  int self_width(const Expr& e) const;
  bool self_signed(const Expr& e) const;

 private:
  BitVec eval_ctx(const Expr& e, int width, bool sign) const;
  const SignalValue& require(const std::string& name) const;
  Lookup lookup_;
};

/// Parameter environment: evaluated constant values by name.
using ParamEnv = std::map<std::string, SignalValue>;

/// Evaluates a constant expression over `env`; nullopt when it references
/// anything outside `env`.
std::optional<BitVec> const_eval(const Expr& e, const ParamEnv& env);
std::optional<int64_t> const_int(const Expr& e, const ParamEnv& env);

/// Header and body parameters of a module, evaluated in declaration order,
/// with optional overrides for header parameters (instance #(...)).
ParamEnv module_params(const ModuleDecl& m, const std::map<std::string, BitVec>& overrides = {});

}  // namespace rtlmark::vlog
