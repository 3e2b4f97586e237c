// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "rtlmark/rules.hpp"
#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace rtlmark {

inline constexpr double kMissProbability = 0.01;
inline constexpr double kDefaultTau = 0.95;

/// Per-rule probability that an unwatermarked module shows the signature.
struct NullModel {
  std::array<double, kRuleCount> p{};
  size_t corpus_size = 0;  // 0 for the built-in defaults

  /// 0.5 for style rules, 0.01 for key-derived ones.
  static NullModel defaults();
  std::string to_json() const;
  static NullModel from_json(const std::string& text);
};

/// Rules whose signature a human author plausibly writes without the key.
bool is_style_rule(RuleId id);

/// Fixed per-rule weight w_r. Under the default null model the rule's
/// log-likelihood contribution w_r * ln((1 - eps) / p_r) equals its nominal
/// contribution, listed with `rules`.
double rule_weight(RuleId id);
double nominal_contribution(RuleId id);

struct RuleContribution {
  RuleId rule = RuleId::T1;
  bool present = false;
  double llr = 0.0;  // contribution when present, else 0
  bool name_dependent = false;
};

struct DetectionReport {
  std::vector<SignatureEvidence> evidence;
  std::vector<RuleContribution> breakdown;
  double score = 0.0;
  double confidence = 0.0;
  bool watermarked = false;
  std::string diagnostic;  // set when the input failed to parse
};

/// Contribution of `rule` when present; never negative.
double contribution(RuleId rule, const NullModel& null);
double logistic(double x);

/// Scores an evidence list. Absent rules contribute nothing.
DetectionReport score_evidence(std::vector<SignatureEvidence> evidence, const NullModel& null,
                               double tau);

DetectionReport detect(const vlog::Ast& ast, const WatermarkKey& key, const NullModel& null,
                       double tau = kDefaultTau);
/// Parse failures give a clean report with a diagnostic.
DetectionReport detect(const vlog::SourceText& source, const WatermarkKey& key,
                       const NullModel& null, double tau = kDefaultTau);

/// Laplace-smoothed match rates over a clean corpus. Throws EmptyCorpus.
/// Files that fail to parse count as non-matching.
NullModel calibrate(const std::vector<vlog::SourceText>& corpus, const WatermarkKey& key);

}  // namespace rtlmark
