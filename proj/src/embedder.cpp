// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/embedder.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <optional>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/printer.hpp"

namespace rtlmark {

using namespace vlog;

void EmbedObjective::validate() const {
  if (!(m >= 0.0) || !(n >= 0.0)) throw Error("objective weights m and n must be non-negative");
  if (!(tau > 0.0 && tau < 1.0)) throw Error("tau must lie strictly between 0 and 1");
}

void order_for_application(std::vector<TransformSite>& sites) {
  std::stable_sort(sites.begin(), sites.end(), [](const TransformSite& a, const TransformSite& b) {
    return application_rank(a.rule) < application_rank(b.rule);
  });
}

WatermarkedDocument embed(const Ast& ast, const TransformPlan& plan, const WatermarkKey& key,
                          const Payload& payload) {
  WatermarkedDocument doc;
  doc.plan = plan;
  Ast cur = ast;
  for (const auto& site : plan.selected) {
    auto [next, rec] = apply(cur, site, key, payload);
    doc.records.push_back(std::move(rec));
    cur = std::move(next);
  }
  doc.source = print(cur);
  return doc;
}

namespace {

struct Trial {
  Ast out;
  DetectionReport report;
};

class Planner {
 public:
  Planner(const Ast& ast, const WatermarkKey& key, const Payload& payload, const NullModel& null)
      : ast_(ast), key_(key), payload_(payload), null_(null) {}

  // Embeds `sites` in application order; nullopt when a site goes stale.
  std::optional<Trial> run(std::vector<TransformSite> sites) {
    order_for_application(sites);
    TransformPlan p;
    p.selected = sites;
    try {
      WatermarkedDocument d = embed(ast_, p, key_, payload_);
      Ast out = parse(d.source);
      DetectionReport r = detect(out, key_, null_, 1.0);
      return Trial{std::move(out), std::move(r)};
    } catch (const SiteStale&) {
      return std::nullopt;
    }
  }

  // Confidence of `sites`, or nullopt when stale or a selected rule left no signature.
  std::optional<double> confidence(const std::vector<TransformSite>& sites) {
    auto t = run(sites);
    if (!t) return std::nullopt;
    for (const auto& s : sites)
      if (!t->report.evidence[rule_index(s.rule)].present) return std::nullopt;
    return t->report.confidence;
  }

 private:
  const Ast& ast_;
  const WatermarkKey& key_;
  const Payload& payload_;
  const NullModel& null_;
};

}  // namespace

TransformPlan plan(const Ast& ast, const WatermarkKey& key, const Payload& payload,
                   const EmbedObjective& objective, const PlannerOptions& options) {
  objective.validate();
  Planner planner(ast, key, payload, options.null);

  std::map<RuleId, std::vector<TransformSite>> sites;
  size_t total_sites = 0;
  for (const auto& s : all_applicable_sites(ast, key)) {
    sites[s.rule].push_back(s);
    ++total_sites;
  }

  std::vector<RuleId> order;
  for (const auto& [r, _] : sites) order.push_back(r);
  std::stable_sort(order.begin(), order.end(), [&](RuleId a, RuleId b) {
    if ((a == RuleId::T15) != (b == RuleId::T15)) return a == RuleId::T15;
    double ca = contribution(a, options.null), cb = contribution(b, options.null);
    if (ca != cb) return ca > cb;
    // Ties go to rules that survive renaming.
    return !rule_info(a).name_dependent && rule_info(b).name_dependent;
  });

  // Nothing can be embedded, so nothing was achieved.
  if (total_sites == 0) throw InsufficientCapacity(0.0, 0);

  std::vector<TransformSite> selected;
  double conf = detect(ast, key, options.null, 1.0).confidence;
  for (RuleId r : order) {
    if (conf >= objective.tau) break;
    const auto& cands = sites[r];
    for (size_t i = 0; i < cands.size() && i < options.attempts_per_rule; ++i) {
      auto trial = selected;
      trial.push_back(cands[i]);
      if (auto c = planner.confidence(trial)) {
        selected = std::move(trial);
        conf = *c;
        break;
      }
    }
  }
  if (conf < objective.tau) throw InsufficientCapacity(conf, total_sites);

  // Drop the weakest removable site until none can go.
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = selected.size(); i-- > 0;) {
      auto trial = selected;
      trial.erase(trial.begin() + static_cast<long>(i));
      auto c = planner.confidence(trial);
      if (c && *c >= objective.tau) {
        selected = std::move(trial);
        conf = *c;
        changed = true;
        break;
      }
    }
  }

  TransformPlan p;
  order_for_application(selected);
  p.selected = std::move(selected);
  p.predicted_confidence = conf;
  p.applicable_rules = sites.size();
  p.applicable_sites = total_sites;
  p.loss = objective.m * static_cast<double>(p.selected.size());
  return p;
}

Manifest Manifest::from_document(const SourceText& input, const WatermarkedDocument& doc,
                                 const WatermarkKey& key, const Payload& payload, double tau) {
  Manifest m;
  m.key_id = key.key_id();
  m.input_sha256 = to_hex(sha256(input.content));
  m.output_sha256 = to_hex(sha256(doc.source.content));
  m.payload_hex = to_hex(payload.encoded);
  m.payload_sha256 = to_hex(sha256(std::string(payload.encoded.begin(), payload.encoded.end())));
  m.tau = tau;
  m.predicted_confidence = doc.plan.predicted_confidence;
  m.sites = doc.plan.selected;
  return m;
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "rtlmark-manifest-1";
  j["key_id"] = key_id;
  j["input_sha256"] = input_sha256;
  j["output_sha256"] = output_sha256;
  j["payload_sha256"] = payload_sha256;
  j["payload_hex"] = payload_hex;
  j["tau"] = tau;
  j["predicted_confidence"] = predicted_confidence;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : sites) {
    nlohmann::ordered_json e;
    e["rule"] = rule_code(s.rule);
    e["module"] = s.module;
    e["path"] = s.path;
    e["description"] = s.description;
    arr.push_back(e);
  }
  j["sites"] = arr;
  return j.dump(2) + "\n";
}

namespace {

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2) throw Error("odd-length hex string");
  Bytes out;
  for (size_t i = 0; i < hex.size(); i += 2) {
    size_t used = 0;
    int v = std::stoi(hex.substr(i, 2), &used, 16);
    if (used != 2) throw Error("bad hex digit");
    out.push_back(static_cast<uint8_t>(v));
  }
  return out;
}

}  // namespace

Manifest Manifest::from_json(const std::string& text) {
  Manifest m;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "rtlmark-manifest-1") throw Error("unknown manifest format");
    m.key_id = j.at("key_id").get<std::string>();
    m.input_sha256 = j.at("input_sha256").get<std::string>();
    m.output_sha256 = j.at("output_sha256").get<std::string>();
    m.payload_sha256 = j.at("payload_sha256").get<std::string>();
    m.payload_hex = j.at("payload_hex").get<std::string>();
    m.tau = j.at("tau").get<double>();
    m.predicted_confidence = j.at("predicted_confidence").get<double>();
    for (const auto& e : j.at("sites")) {
      auto id = parse_rule_id(e.at("rule").get<std::string>());
      if (!id) throw Error("unknown rule in manifest");
      m.sites.push_back({*id, e.at("module").get<std::string>(), e.at("path").get<std::string>(),
                         e.value("description", "")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad manifest: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error("bad manifest: payload is not hex");
  }
  return m;
}

WatermarkedDocument replay(const SourceText& input, const Manifest& manifest, const WatermarkKey& key) {
  if (to_hex(sha256(input.content)) != manifest.input_sha256)
    throw Error("input does not match the manifest");
  if (key.key_id() != manifest.key_id) throw Error("key does not match the manifest");
  Payload payload{{}, {}, from_hex(manifest.payload_hex)};
  TransformPlan p;
  p.selected = manifest.sites;
  p.predicted_confidence = manifest.predicted_confidence;
  return embed(parse(input), p, key, payload);
}

}  // namespace rtlmark
