// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtlmark/detector.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/equivalence.hpp"
#include "rtlmark/netlist.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace rtlmark {

// ------------------------------------------------------------------- attack

struct AttackSpec {
  double fraction = 1.0;
  uint64_t seed = 1;
  int min_len = 3;
  int max_len = 10;

  /// Throws Error unless 0 < fraction <= 1 and 1 <= min_len <= max_len.
  void validate() const;
};

/// Module-scope nets, body parameters and instance names, as "module.name"
/// in declaration order. Ports, header parameters and module names are kept.
std::vector<std::string> renameable_identifiers(const vlog::Ast& ast);

struct AttackResult {
  vlog::SourceText source;
  std::vector<std::pair<std::string, std::string>> renamed;  // "module.old" -> new
};

/// Renames ceil(fraction * N) of the renameable identifiers to fresh random
/// names, consistently at the declaration and every use. Deterministic in
/// (source, spec). Throws ParseError.
AttackResult rename_attack(const vlog::SourceText& source, const AttackSpec& spec);

/// Token-level edit distance between two sources, comments counted as
/// tokens, divided by the longer token count. 0 for identical streams.
double discrepancy(const vlog::SourceText& a, const vlog::SourceText& b);

// ------------------------------------------------------------------- corpus

struct CorpusEntry {
  std::string file;  // relative to the corpus root
  std::string top;
  vlog::SourceText source;
};

struct Corpus {
  std::vector<CorpusEntry> eligible;
  std::vector<CorpusEntry> clean;
};

/// Reads `dir/corpus.json` ({"eligible": {file: top}, "clean": {...}}) when
/// present; otherwise every .v file under dir/eligible and dir/clean with
/// the last module as top. Throws Error on I/O failure.
Corpus load_corpus(const std::string& dir);

// --------------------------------------------------------------- evaluation

struct EvalConfig {
  WatermarkKey key;
  NullModel null = NullModel::defaults();
  EmbedObjective objective;
  std::string model_signature = "model";
  std::string developer_signature = "developer";
  std::optional<AttackSpec> attack;
  bool netlist = false;
  SynthConfig synth;
  EquivalenceBudget budget;
  size_t workers = 1;
};

struct NetlistOutcome {
  std::string status;  // "traced", "tool-missing", "tool-failed", "timeout", "parse-error"
  bool found = false;
  std::string payload_hex;
  std::string expected_hex;  // eligible files only
  std::string diagnostic;
  std::optional<bool> attacked_found;
  std::string attacked_payload_hex;
};

struct FileResult {
  std::string file;
  std::string top;
  bool eligible = false;
  // "ok", "insufficient-capacity", "parse-error", "equivalence-failure", "error"
  std::string status = "ok";
  std::string error;

  size_t applicable_rules = 0;
  size_t applicable_sites = 0;
  std::vector<std::string> selected;  // rule codes in application order
  double predicted_confidence = 0.0;
  double discrepancy = 0.0;
  std::vector<std::string> equivalence;  // verdict per application, then the attack

  bool detected = false;
  double score = 0.0;
  double confidence = 0.0;
  double name_dependent_score = 0.0;  // part of `score` from rename-sensitive rules

  std::optional<bool> attacked_detected;
  double attacked_score = 0.0;
  double attacked_confidence = 0.0;
  size_t renamed = 0;

  std::optional<NetlistOutcome> netlist;

  /// Counts toward the effectiveness metrics.
  bool scored() const { return status == "ok" || status == "equivalence-failure"; }
};

struct RateBlock {
  size_t tp = 0, fn = 0, tn = 0, fp = 0;
  double acc() const;  // percentages; 0 when the denominator is empty
  double tpr() const;
  double fpr() const;
};

struct MetricsReport {
  RateBlock detection;
  std::optional<RateBlock> attacked;
  std::optional<RateBlock> netlist;
  size_t netlist_skipped = 0;
  double mean_applicable_rules = 0.0;
  double mean_selected = 0.0;
  double mean_discrepancy = 0.0;
  size_t equivalence_failures = 0;
  size_t infeasible = 0;
  std::vector<FileResult> files;  // eligible files, then clean, each in corpus order

  /// Stable JSON; carries no timing so identical runs compare byte for byte.
  std::string to_json() const;
  /// Summary rows followed by the per-file applicable/selected comparison.
  std::string to_table() const;
};

/// Embeds over the eligible set, detects over both sets, optionally attacks
/// and synthesizes, and aggregates. Per-file failures are recorded, never
/// thrown. Every recorded application is checked for equivalence.
MetricsReport evaluate(const Corpus& corpus, const EvalConfig& config);

/// Carrier bytes the netlist should hold for a `width`-bit carrier.
Bytes expected_carrier_bytes(const Payload& payload, const WatermarkKey& key, int width);

}  // namespace rtlmark
