// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtlmark/detector.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/harness.hpp"
#include "rtlmark/verilog/parser.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;

namespace {

std::vector<SignatureEvidence> evidence_of(unsigned mask) {
  std::vector<SignatureEvidence> ev;
  for (const auto& r : rule_catalog()) {
    SignatureEvidence e;
    e.rule = r.id;
    e.present = (mask >> rule_index(r.id)) & 1;
    e.strength = e.present ? 1 : 0;
    e.name_dependent = r.name_dependent;
    ev.push_back(e);
  }
  return ev;
}

std::vector<SourceText> clean_sources() {
  Corpus c = load_corpus(RTLMARK_CORPUS);
  std::vector<SourceText> out;
  for (const auto& e : c.clean) out.push_back(e.source);
  return out;
}

std::string clocked_module(int i, bool comma) {
  std::ostringstream o;
  o << "module m" << i << "(input clk, input rst, input d, output reg q);\n"
    << "  always @(posedge clk " << (comma ? "," : "or") << " posedge rst)\n"
    << "    if (rst) q <= 1'b0; else q <= d;\n"
    << "endmodule\n";
  return o.str();
}

}  // namespace

TEST(Detector, DefaultNullModelSeparatesStyleFromKeyedRules) {
  NullModel n = NullModel::defaults();
  EXPECT_EQ(n.corpus_size, 0u);
  for (const auto& r : rule_catalog()) {
    double expected = is_style_rule(r.id) ? 0.5 : 0.01;
    EXPECT_DOUBLE_EQ(n.p[rule_index(r.id)], expected) << r.code;
    EXPECT_EQ(is_style_rule(r.id), !r.keyed || r.id == RuleId::T14) << r.code;
  }
  for (RuleId id : {RuleId::T4, RuleId::T10, RuleId::T11, RuleId::T14}) EXPECT_TRUE(is_style_rule(id));
}

TEST(Detector, DefaultContributionEqualsNominal) {
  NullModel n = NullModel::defaults();
  for (const auto& r : rule_catalog()) {
    double p = n.p[rule_index(r.id)];
    double oracle = rule_weight(r.id) * std::log((1.0 - kMissProbability) / p);
    EXPECT_NEAR(contribution(r.id, n), oracle, 1e-12) << r.code;
    EXPECT_NEAR(contribution(r.id, n), nominal_contribution(r.id), 1e-12) << r.code;
  }
}

TEST(Detector, ScoreIsWeightedLogLikelihoodSum) {
  NullModel n = NullModel::defaults();
  n.p[rule_index(RuleId::T3)] = 0.2;
  unsigned mask = (1u << rule_index(RuleId::T3)) | (1u << rule_index(RuleId::T15)) | (1u << rule_index(RuleId::T4));
  DetectionReport r = score_evidence(evidence_of(mask), n, 0.95);
  double oracle = rule_weight(RuleId::T3) * std::log(0.99 / 0.2) + rule_weight(RuleId::T15) * std::log(0.99 / 0.01) +
                  rule_weight(RuleId::T4) * std::log(0.99 / 0.5);
  EXPECT_NEAR(r.score, oracle, 1e-12);
  EXPECT_NEAR(r.confidence, 1.0 / (1.0 + std::exp(-oracle)), 1e-12);
  EXPECT_EQ(r.watermarked, r.confidence >= 0.95);
}

TEST(Detector, ConfidenceNeverDropsWhenEvidenceIsAdded) {
  NullModel n = NullModel::defaults();
  n.p[rule_index(RuleId::T4)] = 0.999;  // ln(0.99 / p) < 0 must clamp, not subtract
  std::vector<double> conf(1u << kRuleCount);
  for (unsigned m = 0; m < conf.size(); ++m) conf[m] = score_evidence(evidence_of(m), n, 0.95).confidence;
  for (unsigned m = 0; m < conf.size(); ++m)
    for (int b = 0; b < kRuleCount; ++b)
      if (!((m >> b) & 1)) ASSERT_GE(conf[m | (1u << b)], conf[m]) << m << " + " << b;
}

TEST(Detector, StyleEvidenceCannotReachThresholdWithOneKeyedRule) {
  NullModel n = NullModel::defaults();
  unsigned style = 0;
  for (const auto& r : rule_catalog())
    if (is_style_rule(r.id)) style |= 1u << rule_index(r.id);
  EXPECT_FALSE(score_evidence(evidence_of(style), n, kDefaultTau).watermarked);
  for (const auto& r : rule_catalog()) {
    if (is_style_rule(r.id)) continue;
    DetectionReport d = score_evidence(evidence_of(style | (1u << rule_index(r.id))), n, kDefaultTau);
    EXPECT_FALSE(d.watermarked) << r.code;
  }
}

TEST(Detector, BreakdownFlagsNameDependentRules) {
  DetectionReport r = score_evidence(evidence_of((1u << kRuleCount) - 1), NullModel::defaults(), 0.95);
  ASSERT_EQ(r.breakdown.size(), static_cast<size_t>(kRuleCount));
  for (const auto& c : r.breakdown)
    EXPECT_EQ(c.name_dependent, c.rule == RuleId::T6 || c.rule == RuleId::T13) << rule_code(c.rule);
}

TEST(Detector, UnparsableInputIsCleanWithDiagnostic) {
  DetectionReport r = detect(SourceText{"module broken(; endmodule", "b.v"}, WatermarkKey::from_seed(1),
                             NullModel::defaults());
  EXPECT_FALSE(r.watermarked);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Detector, CleanCorpusHasNoFalsePositives) {
  WatermarkKey key = WatermarkKey::from_seed(3);
  for (const auto& s : clean_sources()) {
    DetectionReport r = detect(s, key, NullModel::defaults());
    EXPECT_FALSE(r.watermarked) << s.origin << " " << r.confidence;
  }
}

TEST(Calibrate, ThirtyCleanModulesWithoutCommentMatchesGiveOneOverThirtyTwo) {
  auto corpus = clean_sources();
  ASSERT_EQ(corpus.size(), 30u);
  NullModel n = calibrate(corpus, WatermarkKey::from_seed(5));
  EXPECT_EQ(n.corpus_size, 30u);
  EXPECT_DOUBLE_EQ(n.p[rule_index(RuleId::T13)], 1.0 / 32.0);
}

TEST(Calibrate, NaturalCommaListsInTenOfThirtyGiveElevenOverThirtyTwo) {
  std::vector<SourceText> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back({clocked_module(i, i < 10), "m" + std::to_string(i) + ".v"});
  NullModel n = calibrate(corpus, WatermarkKey::from_seed(5));
  EXPECT_DOUBLE_EQ(n.p[rule_index(RuleId::T4)], 11.0 / 32.0);
}

TEST(Calibrate, EmptyCorpusThrows) {
  EXPECT_THROW(calibrate({}, WatermarkKey::from_seed(1)), EmptyCorpus);
}

TEST(Calibrate, NullModelJsonRoundTrips) {
  NullModel n = calibrate(clean_sources(), WatermarkKey::from_seed(5));
  NullModel back = NullModel::from_json(n.to_json());
  EXPECT_EQ(back.corpus_size, n.corpus_size);
  for (int i = 0; i < kRuleCount; ++i) EXPECT_DOUBLE_EQ(back.p[i], n.p[i]);
  EXPECT_THROW(NullModel::from_json(R"({"corpus_size": 1, "p": {"T1": 1.5}})"), Error);
  EXPECT_THROW(NullModel::from_json("not json"), Error);
}

// Empirical FPR on the calibration corpus stays within the 95% binomial
// upper bound of the rate the null model implies.
TEST(Calibrate, EmpiricalFalsePositiveRateWithinBinomialBound) {
  WatermarkKey key = WatermarkKey::from_seed(5);
  auto corpus = clean_sources();
  NullModel n = calibrate(corpus, key);
  double implied = 0.0;
  for (unsigned m = 0; m < (1u << kRuleCount); ++m) {
    double pr = 1.0;
    for (int b = 0; b < kRuleCount; ++b) pr *= ((m >> b) & 1) ? n.p[b] : 1.0 - n.p[b];
    if (score_evidence(evidence_of(m), n, kDefaultTau).watermarked) implied += pr;
  }
  size_t fp = 0;
  for (const auto& s : corpus) fp += detect(s, key, n).watermarked;
  // Smallest k with P(X > k) < 0.05 for X ~ Bin(N, implied).
  size_t N = corpus.size(), bound = 0;
  double cdf = 0.0;
  for (size_t k = 0; k <= N; ++k) {
    cdf += std::exp(std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0)) * std::pow(implied, k) *
           std::pow(1.0 - implied, static_cast<double>(N - k));
    bound = k;
    if (cdf >= 0.95) break;
  }
  EXPECT_LE(fp, bound) << "implied rate " << implied;
}

TEST(Detector, RenameLeavesExactlyTheNameIndependentScore) {
  Corpus c = load_corpus(RTLMARK_CORPUS);
  WatermarkKey key = WatermarkKey::from_seed(11);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  NullModel null = NullModel::defaults();
  size_t checked = 0;
  for (const auto& e : c.eligible) {
    Ast ast = parse(e.source);
    TransformPlan p;
    try {
      p = plan(ast, key, payload);
    } catch (const InsufficientCapacity&) {
      continue;
    }
    SourceText wm = embed(ast, p, key, payload).source;
    DetectionReport before = detect(parse(wm), key, null);
    double kept = 0.0;
    for (const auto& rc : before.breakdown)
      if (rc.present && !rc.name_dependent) kept += rc.llr;
    for (uint64_t seed = 1; seed <= 2; ++seed) {
      SourceText atk = rename_attack(wm, AttackSpec{1.0, seed}).source;
      DetectionReport after = detect(parse(atk), key, null);
      EXPECT_EQ(after.score, kept) << e.file << " seed " << seed;
      for (const auto& rc : after.breakdown)
        if (!rc.name_dependent) EXPECT_EQ(rc.present, before.breakdown[rule_index(rc.rule)].present) << e.file;
    }
    ++checked;
  }
  EXPECT_GE(checked, 20u);
}
