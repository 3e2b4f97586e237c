// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rtlmark/detector.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/rules.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace rtlmark {

struct EmbedObjective {
  double m = 1.0;  // weight on the number of transformations
  double n = 0.0;  // weight on deviation from the applicable set
  double tau = kDefaultTau;

  /// Throws Error unless m, n >= 0 and 0 < tau < 1.
  void validate() const;
};

struct TransformPlan {
  std::vector<TransformSite> selected;  // in application order
  double predicted_confidence = 0.0;
  size_t applicable_rules = 0;  // rules with at least one site
  size_t applicable_sites = 0;
  double loss = 0.0;  // m * |selected| + n * deviation
};

struct WatermarkedDocument {
  vlog::SourceText source;
  std::vector<TransformationRecord> records;
  TransformPlan plan;
};

struct PlannerOptions {
  NullModel null = NullModel::defaults();
  size_t attempts_per_rule = 4;  // alternative sites tried when one goes stale
};

/// Greedy selection with T15 first, then by descending contribution, each
/// candidate scored by embedding it and running the detector. The result is
/// pruned until removing any one site drops confidence below tau. Throws
/// InsufficientCapacity when every rule together stays below tau.
TransformPlan plan(const vlog::Ast& ast, const WatermarkKey& key, const Payload& payload,
                   const EmbedObjective& objective = {}, const PlannerOptions& options = {});

/// Applies sites in the given order. Throws SiteStale.
WatermarkedDocument embed(const vlog::Ast& ast, const TransformPlan& plan, const WatermarkKey& key,
                          const Payload& payload);

/// Sorts sites into application order: statement rules, token rules, renames.
void order_for_application(std::vector<TransformSite>& sites);

/// Sidecar written next to embedded output.
struct Manifest {
  std::string key_id;
  std::string input_sha256;
  std::string output_sha256;
  std::string payload_sha256;
  std::string payload_hex;  // ciphertext only
  double tau = kDefaultTau;
  double predicted_confidence = 0.0;
  std::vector<TransformSite> sites;

  static Manifest from_document(const vlog::SourceText& input, const WatermarkedDocument& doc,
                                const WatermarkKey& key, const Payload& payload, double tau);
  std::string to_json() const;
  static Manifest from_json(const std::string& text);
};

/// Re-applies the manifest's sites to `input`. Throws Error if the input
/// hash differs and SiteStale if a site no longer resolves.
WatermarkedDocument replay(const vlog::SourceText& input, const Manifest& manifest,
                           const WatermarkKey& key);

}  // namespace rtlmark
