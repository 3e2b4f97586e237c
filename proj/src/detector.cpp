// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/detector.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "rtlmark/errors.hpp"

namespace rtlmark {

using namespace vlog;

namespace {

constexpr double kDefaultKeyedP = 0.01;
constexpr double kDefaultStyleP = 0.5;

// Nominal contributions under the default null model. No single keyed rule
// plus every style rule reaches ln 19, the score at tau = 0.95.
constexpr std::array<double, kRuleCount> kNominal = {
    1.0,   // T1
    0.2,   // T2
    0.6,   // T3
    0.15,  // T4
    0.6,   // T5
    1.0,   // T6
    0.25,  // T7
    1.0,   // T8
    0.25,  // T9
    0.15,  // T10
    0.15,  // T11
    0.4,   // T12
    1.0,   // T13
    0.15,  // T14
    1.6,   // T15
};

double default_p(RuleId id) { return is_style_rule(id) ? kDefaultStyleP : kDefaultKeyedP; }

}  // namespace

bool is_style_rule(RuleId id) {
  // T14 is keyed by a single bit, so half of all authors match it by chance.
  return !rule_info(id).keyed || id == RuleId::T14;
}

double nominal_contribution(RuleId id) { return kNominal[rule_index(id)]; }

double rule_weight(RuleId id) {
  return nominal_contribution(id) / std::log((1.0 - kMissProbability) / default_p(id));
}

NullModel NullModel::defaults() {
  NullModel m;
  for (const auto& info : rule_catalog()) m.p[rule_index(info.id)] = default_p(info.id);
  return m;
}

std::string NullModel::to_json() const {
  nlohmann::ordered_json j;
  j["corpus_size"] = corpus_size;
  nlohmann::ordered_json ps = nlohmann::ordered_json::object();
  for (const auto& info : rule_catalog()) ps[rule_code(info.id)] = p[rule_index(info.id)];
  j["p"] = ps;
  return j.dump(2) + "\n";
}

NullModel NullModel::from_json(const std::string& text) {
  NullModel m = defaults();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad null model: ") + e.what());
  }
  m.corpus_size = j.value("corpus_size", size_t{0});
  if (j.contains("p"))
    for (const auto& [code, v] : j["p"].items()) {
      auto id = parse_rule_id(code);
      if (!id || !v.is_number()) throw Error("bad null model entry '" + code + "'");
      double p = v.get<double>();
      if (!(p > 0.0 && p <= 1.0)) throw Error("null model probability out of range for " + code);
      m.p[rule_index(*id)] = p;
    }
  return m;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double contribution(RuleId rule, const NullModel& null) {
  double p = std::clamp(null.p[rule_index(rule)], 1e-9, 1.0);
  return std::max(0.0, rule_weight(rule) * std::log((1.0 - kMissProbability) / p));
}

DetectionReport score_evidence(std::vector<SignatureEvidence> evidence, const NullModel& null,
                               double tau) {
  DetectionReport r;
  for (const auto& ev : evidence) {
    RuleContribution c{ev.rule, ev.present, ev.present ? contribution(ev.rule, null) : 0.0,
                       ev.name_dependent};
    r.score += c.llr;
    r.breakdown.push_back(c);
  }
  r.evidence = std::move(evidence);
  r.confidence = logistic(r.score);
  r.watermarked = r.confidence >= tau;
  return r;
}

DetectionReport detect(const Ast& ast, const WatermarkKey& key, const NullModel& null, double tau) {
  return score_evidence(scan_signatures(ast, key), null, tau);
}

DetectionReport detect(const SourceText& source, const WatermarkKey& key, const NullModel& null,
                       double tau) {
  try {
    return detect(parse(source), key, null, tau);
  } catch (const ParseError& e) {
    DetectionReport r;
    for (const auto& info : rule_catalog()) {
      r.evidence.push_back({info.id, false, 0, info.name_dependent});
      r.breakdown.push_back({info.id, false, 0.0, info.name_dependent});
    }
    r.confidence = logistic(0.0);
    r.diagnostic = e.what();
    return r;
  }
}

NullModel calibrate(const std::vector<SourceText>& corpus, const WatermarkKey& key) {
  if (corpus.empty()) throw EmptyCorpus("calibration corpus is empty");
  std::array<size_t, kRuleCount> matches{};
  for (const auto& src : corpus) {
    try {
      Ast ast = parse(src);
      for (const auto& ev : scan_signatures(ast, key))
        if (ev.present) ++matches[rule_index(ev.rule)];
    } catch (const ParseError&) {
    }
  }
  NullModel m;
  m.corpus_size = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (size_t i = 0; i < kRuleCount; ++i) m.p[i] = (static_cast<double>(matches[i]) + 1.0) / (n + 2.0);
  return m;
}

}  // namespace rtlmark
