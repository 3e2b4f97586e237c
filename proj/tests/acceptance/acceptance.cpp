// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance run over the bundled corpus. Prints one PASS/FAIL
// line per criterion and exits non-zero when any criterion fails.
#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "rtlmark/detector.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/equivalence.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/harness.hpp"
#include "rtlmark/netlist.hpp"
#include "rtlmark/verilog/parser.hpp"
#include "rtlmark/verilog/printer.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr size_t kMinRoundTripFiles = 30;
constexpr double kRoundTripSeconds = 10.0;
constexpr size_t kMinApplications = 150;
constexpr double kEquivalenceSeconds = 300.0;
constexpr double kTau = 0.95;
constexpr double kRequiredTpr = 100.0;
constexpr double kMaxFpr = 100.0 / 30.0;  // one clean file in thirty
constexpr int kAttackSeeds = 5;
constexpr double kScoreSplitTolerance = 1e-12;
constexpr int kWrongKeys = 100;
constexpr uint64_t kKeySeed = 1;
constexpr uint64_t kAttackSeed = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

std::vector<CorpusEntry> all_files(const Corpus& c) {
  std::vector<CorpusEntry> out = c.eligible;
  out.insert(out.end(), c.clean.begin(), c.clean.end());
  return out;
}

std::string fmt(double v, int prec = 2) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(prec) << v;
  return o.str();
}

struct Embedded {
  CorpusEntry entry;
  Ast ast;
  TransformPlan plan;
  SourceText watermarked;
};

// Plans and embeds every eligible file with a feasible plan.
std::vector<Embedded> embed_corpus(const Corpus& c, const WatermarkKey& key, const Payload& payload) {
  std::vector<Embedded> out;
  for (const auto& e : c.eligible) {
    Ast ast = parse(e.source);
    try {
      TransformPlan p = plan(ast, key, payload, EmbedObjective{1.0, 0.0, kTau});
      SourceText wm = embed(ast, p, key, payload).source;
      out.push_back({e, std::move(ast), std::move(p), std::move(wm)});
    } catch (const InsufficientCapacity&) {
    }
  }
  return out;
}

Outcome roundtrip(const Corpus& c) {
  auto t0 = Clock::now();
  size_t n = 0, ok = 0;
  std::string bad;
  for (const auto& e : all_files(c)) {
    ++n;
    try {
      Ast a = parse(e.source);
      Ast b = parse(print(a));
      if (structurally_equal(a, b))
        ++ok;
      else
        bad += " " + e.file;
    } catch (const std::exception& ex) {
      bad += " " + e.file + "(" + ex.what() + ")";
    }
  }
  double s = seconds_since(t0);
  Outcome o;
  o.pass = n >= kMinRoundTripFiles && ok == n && s < kRoundTripSeconds;
  o.detail = std::to_string(ok) + "/" + std::to_string(n) + " files identical in " + fmt(s) + " s" + bad;
  return o;
}

Outcome semantics(const Corpus& c, const WatermarkKey& key, const Payload& payload) {
  auto t0 = Clock::now();
  std::map<RuleId, size_t> per_rule;
  size_t apps = 0, exhaustive = 0;
  std::vector<std::string> failures;
  for (const auto& e : all_files(c)) {
    Ast ast = parse(e.source);
    for (const auto& site : all_applicable_sites(ast, key)) {
      ++apps;
      ++per_rule[site.rule];
      std::string where = e.file + " " + rule_code(site.rule) + " " + site.path;
      try {
        Ast out = parse(print(apply(ast, site, key, payload).first));
        EquivalenceVerdict v = check_equivalence(ast, out);
        if (!v.equivalent()) failures.push_back(where + ": " + v.to_string());
        exhaustive += v.kind == EquivalenceVerdict::Kind::EquivalentExhaustive;
      } catch (const std::exception& ex) {
        failures.push_back(where + ": " + ex.what());
      }
    }
  }
  double s = seconds_since(t0);
  Outcome o;
  o.pass = failures.empty() && apps >= kMinApplications && per_rule.size() == static_cast<size_t>(kRuleCount) &&
           s < kEquivalenceSeconds;
  o.detail = std::to_string(apps) + " applications, " + std::to_string(per_rule.size()) + "/15 rules, " +
             std::to_string(exhaustive) + " exhaustive, " + std::to_string(failures.size()) + " failures, " + fmt(s) +
             " s";
  for (size_t i = 0; i < failures.size() && i < 10; ++i) o.detail += "\n    " + failures[i];
  return o;
}

Outcome effectiveness(const MetricsReport& r) {
  Outcome o;
  o.pass = r.detection.tp > 0 && r.detection.tpr() == kRequiredTpr && r.detection.fpr() <= kMaxFpr &&
           r.equivalence_failures == 0;
  o.detail = "TPR " + fmt(r.detection.tpr()) + "% over " + std::to_string(r.detection.tp + r.detection.fn) +
             " feasible plans, FPR " + fmt(r.detection.fpr()) + "% over " +
             std::to_string(r.detection.tn + r.detection.fp) + " clean, ACC " + fmt(r.detection.acc()) + "%, " +
             std::to_string(r.infeasible) + " infeasible";
  return o;
}

Outcome robustness(const std::vector<Embedded>& docs, const WatermarkKey& key) {
  NullModel null = NullModel::defaults();
  size_t runs = 0, exact = 0, robust_runs = 0, robust_hits = 0, detected = 0;
  double worst = 0.0;
  std::vector<std::string> bad;
  for (const auto& d : docs) {
    DetectionReport before = detect(parse(d.watermarked), key, null, kTau);
    double kept = 0.0, name_dep = 0.0;
    for (const auto& rc : before.breakdown) {
      if (!rc.present) continue;
      (rc.name_dependent ? name_dep : kept) += rc.llr;
    }
    bool robust_plan = true;
    for (const auto& s : d.plan.selected) robust_plan &= !rule_info(s.rule).name_dependent;
    for (int seed = 1; seed <= kAttackSeeds; ++seed) {
      SourceText atk = rename_attack(d.watermarked, AttackSpec{1.0, static_cast<uint64_t>(seed)}).source;
      DetectionReport after = detect(parse(atk), key, null, kTau);
      ++runs;
      double gap = std::fabs(after.score - (before.score - name_dep));
      worst = std::max(worst, gap);
      if (after.score == kept && gap <= kScoreSplitTolerance)
        ++exact;
      else
        bad.push_back(d.entry.file + " seed " + std::to_string(seed));
      detected += after.watermarked;
      if (robust_plan) {
        ++robust_runs;
        robust_hits += after.watermarked;
      }
    }
  }
  Outcome o;
  o.pass = runs > 0 && exact == runs && robust_hits == robust_runs;
  o.detail = std::to_string(exact) + "/" + std::to_string(runs) + " runs with score = pre-attack minus T6/T13 " +
             "(max gap " + std::to_string(worst) + "), rename-robust plans detected " + std::to_string(robust_hits) +
             "/" + std::to_string(robust_runs) + ", all plans detected " + std::to_string(detected) + "/" +
             std::to_string(runs);
  for (size_t i = 0; i < bad.size() && i < 10; ++i) o.detail += "\n    " + bad[i];
  return o;
}

Outcome netlist_persistence(const MetricsReport& r, bool available) {
  Outcome o;
  if (!available) {
    o.pass = true;
    o.skipped = true;
    o.detail = "WARNING: synthesis tool not found, skipped";
    return o;
  }
  size_t planned = 0, exact = 0, exact_attacked = 0, tool_fail = 0, clean = 0, clean_traces = 0;
  std::vector<std::string> bad;
  for (const auto& f : r.files) {
    if (!f.netlist) continue;
    const NetlistOutcome& n = *f.netlist;
    if (n.status != "traced") {
      ++tool_fail;
      if (!f.eligible) bad.push_back(f.file + " " + n.status);
      continue;
    }
    if (!f.eligible) {
      ++clean;
      clean_traces += n.found;
      if (n.found) bad.push_back(f.file + " traced on clean netlist");
      continue;
    }
    ++planned;
    bool ok = n.found && !n.expected_hex.empty() && n.payload_hex == n.expected_hex;
    bool ok_atk = n.attacked_found.value_or(false) && n.attacked_payload_hex == n.expected_hex;
    exact += ok;
    exact_attacked += ok_atk;
    if (!ok || !ok_atk)
      bad.push_back(f.file + " got " + n.payload_hex + "/" + n.attacked_payload_hex + " want " + n.expected_hex + " " +
                    n.diagnostic);
  }
  o.pass = planned > 0 && exact == planned && exact_attacked == planned && clean > 0 && clean_traces == 0 &&
           bad.empty();
  o.detail = "T15 designs exact " + std::to_string(exact) + "/" + std::to_string(planned) + " before and " +
             std::to_string(exact_attacked) + "/" + std::to_string(planned) + " after attack, clean traces " +
             std::to_string(clean_traces) + "/" + std::to_string(clean) + ", synthesis failures " +
             std::to_string(tool_fail);
  for (size_t i = 0; i < bad.size() && i < 10; ++i) o.detail += "\n    " + bad[i];
  return o;
}

std::optional<double> confidence_of(const Ast& ast, std::vector<TransformSite> sites, const WatermarkKey& key,
                                    const Payload& payload) {
  order_for_application(sites);
  TransformPlan p;
  p.selected = std::move(sites);
  try {
    return detect(parse(embed(ast, p, key, payload).source), key, NullModel::defaults(), kTau).confidence;
  } catch (const SiteStale&) {
    return std::nullopt;
  }
}

Outcome transparency(const std::vector<Embedded>& docs, const MetricsReport& r, const WatermarkKey& key,
                     const Payload& payload, std::ostream& table) {
  size_t minimal = 0;
  std::vector<std::string> bad;
  for (const auto& d : docs) {
    bool ok = true;
    for (size_t i = 0; i < d.plan.selected.size(); ++i) {
      auto fewer = d.plan.selected;
      fewer.erase(fewer.begin() + static_cast<long>(i));
      auto c = confidence_of(d.ast, fewer, key, payload);
      if (c && *c >= kTau) {
        ok = false;
        bad.push_back(d.entry.file + " can drop " + rule_code(d.plan.selected[i].rule));
      }
    }
    minimal += ok;
  }
  table << "  " << std::left << std::setw(28) << "file" << std::right << std::setw(12) << "applicable" << std::setw(10)
        << "selected" << "  rules\n";
  for (const auto& f : r.files) {
    if (!f.eligible) continue;
    std::string rules;
    for (const auto& s : f.selected) rules += (rules.empty() ? "" : ",") + s;
    table << "  " << std::left << std::setw(28) << f.file << std::right << std::setw(12) << f.applicable_rules
          << std::setw(10) << f.selected.size() << "  " << (f.status == "ok" ? rules : f.status) << "\n";
  }
  Outcome o;
  o.pass = r.mean_selected < r.mean_applicable_rules && minimal == docs.size() && !docs.empty();
  o.detail = "mean applicable " + fmt(r.mean_applicable_rules) + " vs selected " + fmt(r.mean_selected) + ", " +
             std::to_string(minimal) + "/" + std::to_string(docs.size()) + " plans 1-minimal, mean D " +
             fmt(r.mean_discrepancy, 3);
  for (size_t i = 0; i < bad.size() && i < 10; ++i) o.detail += "\n    " + bad[i];
  return o;
}

Outcome key_separation(const std::vector<Embedded>& docs, const WatermarkKey& key) {
  std::mt19937_64 rng(20261017);
  size_t checks = 0, hits = 0;
  double worst = 0.0;
  for (int k = 0; k < kWrongKeys; ++k) {
    WatermarkKey wrong = WatermarkKey::from_seed(rng());
    if (wrong == key) continue;
    for (const auto& d : docs) {
      DetectionReport r = detect(d.watermarked, wrong, NullModel::defaults(), kTau);
      ++checks;
      hits += r.watermarked;
      worst = std::max(worst, r.confidence);
    }
  }
  Outcome o;
  o.pass = checks == static_cast<size_t>(kWrongKeys) * docs.size() && hits == 0;
  o.detail = std::to_string(hits) + " watermarked verdicts in " + std::to_string(checks) + " wrong-key checks over " +
             std::to_string(docs.size()) + " documents, max confidence " + fmt(worst, 4);
  return o;
}

Outcome determinism(const MetricsReport& a, const MetricsReport& b, const fs::path& work) {
  std::string ja = a.to_json(), jb = b.to_json();
  std::ofstream(work / "report_run1.json") << ja;
  std::ofstream(work / "report_run2.json") << jb;
  Outcome o;
  o.pass = ja == jb && a.to_table() == b.to_table();
  o.detail = std::to_string(ja.size()) + "-byte reports " + (ja == jb ? "identical" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run over the bundled corpus"};
  std::string work = "acceptance_work";
  std::string corpus_dir = RTLMARK_CORPUS;
  size_t workers = 4;
  app.add_option("--work", work, "Scratch and report directory");
  app.add_option("--corpus", corpus_dir, "Corpus directory");
  app.add_option("--workers", workers, "Evaluation threads")->check(CLI::Range(1, 64));
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  Corpus corpus = load_corpus(corpus_dir);
  WatermarkKey key = WatermarkKey::from_seed(kKeySeed);
  EvalConfig cfg;
  cfg.key = key;
  cfg.objective.tau = kTau;
  cfg.model_signature = "gpt-4";
  cfg.developer_signature = "dev-A";
  Payload payload = encode_payload(cfg.model_signature, cfg.developer_signature, key);
  std::cout << "corpus: " << corpus.eligible.size() << " eligible, " << corpus.clean.size() << " clean\n";

  std::array<Outcome, 8> out;
  auto run = [&](int i, const char* name, const std::function<Outcome()>& f) {
    auto t0 = Clock::now();
    out[i - 1] = f();
    std::cout << "criterion " << i << " (" << name << "): "
              << (out[i - 1].skipped ? "PASS (skipped)" : out[i - 1].pass ? "PASS" : "FAIL") << " | "
              << out[i - 1].detail << " [" << fmt(seconds_since(t0), 1) << " s]\n"
              << std::flush;
  };

  run(1, "round-trip", [&] { return roundtrip(corpus); });
  run(2, "semantics preservation", [&] { return semantics(corpus, key, payload); });

  MetricsReport plain = evaluate(corpus, cfg);
  std::ofstream(fs::path(work) / "report_plain.json") << plain.to_json();
  run(3, "effectiveness", [&] { return effectiveness(plain); });

  std::vector<Embedded> docs = embed_corpus(corpus, key, payload);
  run(4, "robustness", [&] { return robustness(docs, key); });

  bool synth = synthesis_available(cfg.synth);
  cfg.attack = AttackSpec{1.0, kAttackSeed};
  cfg.netlist = synth;
  cfg.workers = workers;
  MetricsReport full;
  run(5, "netlist persistence", [&] {
    full = evaluate(corpus, cfg);
    return netlist_persistence(full, synth);
  });

  std::ostringstream table;
  run(6, "transparency", [&] { return transparency(docs, plain, key, payload, table); });
  std::cout << table.str();
  std::ofstream(fs::path(work) / "transparency.txt") << table.str();

  run(7, "key separation", [&] { return key_separation(docs, key); });
  run(8, "determinism", [&] { return determinism(full, evaluate(corpus, cfg), work); });

  bool all = true;
  for (const auto& o : out) all &= o.pass;
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return all ? 0 : 1;
}
