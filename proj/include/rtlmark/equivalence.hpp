// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "rtlmark/verilog/ast.hpp"

namespace rtlmark {

struct EquivalenceBudget {
  int exhaustive_bits = 12;  // combinational modules up to this many input bits
  int random_vectors = 1000;
  int sequential_cycles = 1000;
  uint64_t seed = 1;
};

struct EquivalenceVerdict {
  enum class Kind { EquivalentExhaustive, EquivalentSampled, Inequivalent };
  Kind kind = Kind::EquivalentExhaustive;
  size_t vectors = 0;          // random vectors or cycles for sampled verdicts
  std::string counterexample;  // inputs, step and differing output

  bool equivalent() const { return kind != Kind::Inequivalent; }
  /// "equivalent-exhaustive", "equivalent-sampled(n)" or "inequivalent(...)".
  std::string to_string() const;
};

/// Compares every module of `a` with the same-named module of `b`.
///
/// Inputs present on only one side (the T15 trigger) are tied to 0. An
/// output bit that is unknown on either side matches anything, so an
/// unknown-valued condition never counts as a difference. Modules with no
/// clocked blocks and at most `exhaustive_bits` input bits are checked
/// exhaustively; otherwise directed corner vectors are followed by random
/// ones. Sequential modules see a reset prefix, then one clock cycle per vector.
EquivalenceVerdict check_equivalence(const vlog::Ast& a, const vlog::Ast& b,
                                     const EquivalenceBudget& budget = {});

}  // namespace rtlmark
