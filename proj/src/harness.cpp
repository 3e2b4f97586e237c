// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "rtlmark/errors.hpp"
#include "rtlmark/rewrite.hpp"
#include "rtlmark/verilog/lexer.hpp"
#include "rtlmark/verilog/printer.hpp"
#include "rtlmark/verilog/symbols.hpp"

namespace rtlmark {

namespace fs = std::filesystem;
using namespace vlog;

void AttackSpec::validate() const {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("attack fraction must lie in (0, 1]");
  if (min_len < 1 || min_len > max_len) throw Error("attack name lengths must satisfy 1 <= min <= max");
}

namespace {

bool renameable(const Symbol& s) {
  if (!s.scope.empty()) return false;
  switch (s.kind) {
    case SymbolKind::Net:
    case SymbolKind::Instance:
      return true;
    case SymbolKind::Parameter:
      return !s.header_param;
    case SymbolKind::Port:
      return false;
  }
  return false;
}

std::string token_text(const std::string& src, const Token& t) { return src.substr(t.span.begin, t.span.size()); }

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::vector<std::string> renameable_identifiers(const Ast& ast) {
  std::vector<std::string> out;
  SymbolTable table = resolve(ast);
  for (const auto& m : table.modules)
    for (const auto& s : m.symbols)
      if (renameable(s)) out.push_back(m.module + "." + s.name);
  return out;
}

AttackResult rename_attack(const SourceText& source, const AttackSpec& spec) {
  spec.validate();
  Ast ast = parse(source);
  SymbolTable table = resolve(ast);

  struct Target {
    const ModuleSymbols* syms;
    std::string name;
  };
  std::vector<Target> targets;
  for (const auto& m : table.modules)
    for (const auto& s : m.symbols)
      if (renameable(s)) targets.push_back({&m, s.name});

  std::mt19937_64 rng(spec.seed);
  // Fisher-Yates on raw draws keeps the output independent of the standard library.
  for (size_t i = targets.size(); i > 1; --i) std::swap(targets[i - 1], targets[rng() % i]);
  size_t k = static_cast<size_t>(std::ceil(spec.fraction * static_cast<double>(targets.size()) - 1e-9));
  targets.resize(std::min(k, targets.size()));
  // Rename in declaration order so the drawn names do not depend on the shuffle tail.
  std::stable_sort(targets.begin(), targets.end(), [&](const Target& a, const Target& b) {
    if (a.syms != b.syms) return a.syms < b.syms;
    return a.syms->find(a.name)->order < b.syms->find(b.name)->order;
  });

  std::set<std::string> taken;
  for (const auto& t : *ast.tokens)
    if (t.kind == TokenKind::Identifier) taken.insert(token_text(*ast.source, t));
  for (const auto& m : ast.modules) taken.insert(m.name);

  static const char kFirst[] = "abcdefghijklmnopqrstuvwxyz";
  static const char kRest[] = "abcdefghijklmnopqrstuvwxyz0123456789_";
  auto fresh = [&]() {
    for (;;) {
      size_t len = static_cast<size_t>(spec.min_len) + rng() % static_cast<uint64_t>(spec.max_len - spec.min_len + 1);
      std::string n(1, kFirst[rng() % 26]);
      while (n.size() < len) n += kRest[rng() % 37];
      if (!is_keyword(n) && taken.insert(n).second) return n;
    }
  };

  AttackResult res;
  Rewriter rw(*ast.source);
  std::map<const ModuleSymbols*, std::map<std::string, std::string>> names;
  for (const auto& t : targets) {
    std::string n = fresh();
    names[t.syms][t.name] = n;
    res.renamed.push_back({t.syms->module + "." + t.name, n});
  }
  for (const auto& [syms, map] : names) rename_symbols(rw, *syms, map);
  res.source = SourceText{rw.result(), source.origin};
  return res;
}

double discrepancy(const SourceText& a, const SourceText& b) {
  auto stream = [](const SourceText& s) {
    std::vector<std::string> out;
    for (const auto& t : lex(s.content, s.origin)) {
      for (const auto& c : comments_in(s.content, t.trivia)) out.push_back(c.text);
      if (t.kind != TokenKind::End) out.push_back(token_text(s.content, t));
    }
    return out;
  };
  auto x = stream(a), y = stream(b);
  size_t n = std::max(x.size(), y.size());
  if (n == 0) return 0.0;
  std::vector<size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= y.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[y.size()]) / static_cast<double>(n);
}

// ------------------------------------------------------------------- corpus

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_module(const SourceText& s) {
  try {
    Ast ast = parse(s);
    if (!ast.modules.empty()) return ast.modules.back().name;
  } catch (const ParseError&) {
  }
  return {};
}

}  // namespace

Corpus load_corpus(const std::string& dir) {
  Corpus c;
  fs::path root(dir);
  if (!fs::is_directory(root)) throw Error("corpus directory not found: " + dir);
  auto entry = [&](const std::string& rel, std::string top) {
    SourceText src{read_text(root / rel), rel};
    if (top.empty()) top = last_module(src);
    return CorpusEntry{rel, top, std::move(src)};
  };
  fs::path manifest = root / "corpus.json";
  if (fs::exists(manifest)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(manifest));
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad corpus.json: " + std::string(e.what()));
    }
    for (const char* set : {"eligible", "clean"}) {
      if (!j.contains(set)) continue;
      std::vector<std::pair<std::string, std::string>> items;
      for (const auto& [file, top] : j[set].items()) {
        std::string rel = file.find('/') == std::string::npos ? std::string(set) + "/" + file : file;
        items.push_back({rel, top.get<std::string>()});
      }
      std::sort(items.begin(), items.end());
      for (const auto& [rel, top] : items)
        (std::string(set) == "eligible" ? c.eligible : c.clean).push_back(entry(rel, top));
    }
    return c;
  }
  for (const char* set : {"eligible", "clean"}) {
    fs::path sub = root / set;
    if (!fs::is_directory(sub)) continue;
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(sub))
      if (e.is_regular_file() && e.path().extension() == ".v") files.push_back(fs::relative(e.path(), root).string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) (std::string(set) == "eligible" ? c.eligible : c.clean).push_back(entry(f, {}));
  }
  return c;
}

// --------------------------------------------------------------- evaluation

Bytes expected_carrier_bytes(const Payload& payload, const WatermarkKey& key, int width) {
  BitVec v = carrier_constant(payload, key, width);
  Bytes out(static_cast<size_t>((width + 7) / 8), 0);
  for (int i = 0; i < width; ++i)
    if (v.bit(i)) out[static_cast<size_t>(i / 8)] |= static_cast<uint8_t>(1u << (i % 8));
  return out;
}

double RateBlock::acc() const {
  size_t n = tp + tn + fp + fn;
  return n ? 100.0 * static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
}
double RateBlock::tpr() const {
  return tp + fn ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}
double RateBlock::fpr() const {
  return fp + tn ? 100.0 * static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
}

namespace {

double name_dependent_part(const DetectionReport& r) {
  double s = 0.0;
  for (const auto& c : r.breakdown)
    if (c.present && c.name_dependent) s += c.llr;
  return s;
}

struct Netlisted {
  NetlistOutcome out;
  int width = 0;
};

Netlisted run_netlist(const SourceText& src, const std::string& top, const EvalConfig& cfg) {
  Netlisted r;
  try {
    SourceText net = synthesize(src, top, cfg.synth);
    NetlistGraph g = parse_netlist(net, top);
    NetlistEvidence ev = trace_watermark(g, cfg.key);
    r.out.status = "traced";
    r.out.found = ev.found;
    r.out.payload_hex = to_hex(ev.payload_bytes);
    r.out.diagnostic = ev.diagnostic;
    if (ev.found)
      if (const NetlistPort* p = g.port(ev.carrier_net)) r.width = static_cast<int>(p->bits.size());
  } catch (const ToolMissing& e) {
    r.out.status = "tool-missing";
    r.out.diagnostic = e.what();
  } catch (const ToolFailed& e) {
    r.out.status = "tool-failed";
    r.out.diagnostic = e.what();
  } catch (const Timeout& e) {
    r.out.status = "timeout";
    r.out.diagnostic = e.what();
  } catch (const ParseError& e) {
    r.out.status = "parse-error";
    r.out.diagnostic = e.what();
  }
  return r;
}

AttackSpec file_attack(const AttackSpec& base, const std::string& file) {
  AttackSpec s = base;
  s.seed = fnv1a(file) ^ (base.seed * 0x9e3779b97f4a7c15ull);
  return s;
}

void attack_and_detect(FileResult& r, const SourceText& src, const EvalConfig& cfg, const Ast& before) {
  AttackResult a = rename_attack(src, file_attack(*cfg.attack, r.file));
  r.renamed = a.renamed.size();
  Ast after = parse(a.source);
  EquivalenceVerdict v = check_equivalence(before, after, cfg.budget);
  r.equivalence.push_back("attack: " + v.to_string());
  if (!v.equivalent()) r.status = "equivalence-failure";
  DetectionReport d = detect(after, cfg.key, cfg.null, cfg.objective.tau);
  r.attacked_detected = d.watermarked;
  r.attacked_score = d.score;
  r.attacked_confidence = d.confidence;
}

FileResult run_eligible(const CorpusEntry& e, const EvalConfig& cfg, const Payload& payload) {
  FileResult r;
  r.file = e.file;
  r.top = e.top;
  r.eligible = true;
  try {
    Ast ast = parse(e.source);
    TransformPlan p;
    try {
      p = plan(ast, cfg.key, payload, cfg.objective, PlannerOptions{cfg.null});
    } catch (const InsufficientCapacity& ic) {
      r.status = "insufficient-capacity";
      r.error = ic.what();
      r.predicted_confidence = ic.achieved();
      auto sites = all_applicable_sites(ast, cfg.key);
      std::set<RuleId> rules;
      for (const auto& s : sites) rules.insert(s.rule);
      r.applicable_rules = rules.size();
      r.applicable_sites = sites.size();
      return r;
    }
    r.applicable_rules = p.applicable_rules;
    r.applicable_sites = p.applicable_sites;
    r.predicted_confidence = p.predicted_confidence;
    bool t15 = false;
    for (const auto& s : p.selected) {
      r.selected.push_back(rule_code(s.rule));
      t15 |= s.rule == RuleId::T15;
    }

    // Same sequence as embed(), with each step checked against its predecessor.
    Ast cur = ast;
    Ast cur_parsed = ast;
    for (const auto& site : p.selected) {
      auto [next, rec] = apply(cur, site, cfg.key, payload);
      Ast next_parsed = parse(print(next));
      EquivalenceVerdict v = check_equivalence(cur_parsed, next_parsed, cfg.budget);
      r.equivalence.push_back(rule_code(site.rule) + ": " + v.to_string());
      if (!v.equivalent()) r.status = "equivalence-failure";
      cur = std::move(next);
      cur_parsed = std::move(next_parsed);
    }
    SourceText wm = print(cur);
    wm.origin = e.file;
    r.discrepancy = discrepancy(e.source, wm);

    DetectionReport d = detect(cur_parsed, cfg.key, cfg.null, cfg.objective.tau);
    r.detected = d.watermarked;
    r.score = d.score;
    r.confidence = d.confidence;
    r.name_dependent_score = name_dependent_part(d);

    std::optional<AttackResult> attacked;
    if (cfg.attack) {
      attack_and_detect(r, wm, cfg, cur_parsed);
      attacked = rename_attack(wm, file_attack(*cfg.attack, r.file));
    }
    if (cfg.netlist && t15) {
      Netlisted n = run_netlist(wm, e.top, cfg);
      if (n.width) n.out.expected_hex = to_hex(expected_carrier_bytes(payload, cfg.key, n.width));
      if (attacked && n.out.status == "traced") {
        Netlisted na = run_netlist(attacked->source, e.top, cfg);
        if (na.out.status == "traced") {
          n.out.attacked_found = na.out.found;
          n.out.attacked_payload_hex = na.out.payload_hex;
        }
      }
      r.netlist = n.out;
    }
  } catch (const ParseError& ex) {
    r.status = "parse-error";
    r.error = ex.what();
  } catch (const std::exception& ex) {
    r.status = "error";
    r.error = ex.what();
  }
  return r;
}

FileResult run_clean(const CorpusEntry& e, const EvalConfig& cfg) {
  FileResult r;
  r.file = e.file;
  r.top = e.top;
  try {
    Ast ast = parse(e.source);
    DetectionReport d = detect(ast, cfg.key, cfg.null, cfg.objective.tau);
    r.detected = d.watermarked;
    r.score = d.score;
    r.confidence = d.confidence;
    r.name_dependent_score = name_dependent_part(d);
    if (cfg.attack) attack_and_detect(r, e.source, cfg, ast);
    if (cfg.netlist) r.netlist = run_netlist(e.source, e.top, cfg).out;
  } catch (const ParseError& ex) {
    r.status = "parse-error";
    r.error = ex.what();
  } catch (const std::exception& ex) {
    r.status = "error";
    r.error = ex.what();
  }
  return r;
}

}  // namespace

MetricsReport evaluate(const Corpus& corpus, const EvalConfig& cfg) {
  cfg.objective.validate();
  if (cfg.attack) cfg.attack->validate();
  Payload payload = encode_payload(cfg.model_signature, cfg.developer_signature, cfg.key);

  const size_t n_elig = corpus.eligible.size();
  const size_t total = n_elig + corpus.clean.size();
  std::vector<FileResult> results(total);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < total; i = next++)
      results[i] = i < n_elig ? run_eligible(corpus.eligible[i], cfg, payload)
                              : run_clean(corpus.clean[i - n_elig], cfg);
  };
  size_t nw = std::max<size_t>(1, std::min(cfg.workers, total));
  std::vector<std::thread> pool;
  for (size_t w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Single-threaded merge in corpus order.
  MetricsReport m;
  if (cfg.attack) m.attacked = RateBlock{};
  if (cfg.netlist) m.netlist = RateBlock{};
  size_t planned = 0;
  double sum_app = 0, sum_sel = 0, sum_d = 0;
  for (const auto& r : results) {
    if (r.status == "equivalence-failure") ++m.equivalence_failures;
    if (r.status == "insufficient-capacity") ++m.infeasible;
    if (r.scored()) {
      if (r.eligible) {
        (r.detected ? m.detection.tp : m.detection.fn)++;
        ++planned;
        sum_app += static_cast<double>(r.applicable_rules);
        sum_sel += static_cast<double>(r.selected.size());
        sum_d += r.discrepancy;
      } else {
        (r.detected ? m.detection.fp : m.detection.tn)++;
      }
      if (m.attacked && r.attacked_detected) {
        if (r.eligible)
          (*r.attacked_detected ? m.attacked->tp : m.attacked->fn)++;
        else
          (*r.attacked_detected ? m.attacked->fp : m.attacked->tn)++;
      }
    }
    if (m.netlist && r.netlist) {
      if (r.netlist->status != "traced") {
        ++m.netlist_skipped;
      } else if (r.eligible) {
        bool hit = r.netlist->found && r.netlist->payload_hex == r.netlist->expected_hex;
        (hit ? m.netlist->tp : m.netlist->fn)++;
      } else {
        (r.netlist->found ? m.netlist->fp : m.netlist->tn)++;
      }
    }
  }
  if (planned) {
    m.mean_applicable_rules = sum_app / static_cast<double>(planned);
    m.mean_selected = sum_sel / static_cast<double>(planned);
    m.mean_discrepancy = sum_d / static_cast<double>(planned);
  }
  m.files = std::move(results);
  return m;
}

namespace {

nlohmann::ordered_json rates_json(const RateBlock& b) {
  nlohmann::ordered_json j;
  j["tp"] = b.tp;
  j["fn"] = b.fn;
  j["tn"] = b.tn;
  j["fp"] = b.fp;
  j["acc"] = b.acc();
  j["tpr"] = b.tpr();
  j["fpr"] = b.fpr();
  return j;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "rtlmark-report-1";
  j["detection"] = rates_json(detection);
  if (attacked) j["attacked"] = rates_json(*attacked);
  if (netlist) {
    j["netlist"] = rates_json(*netlist);
    j["netlist"]["skipped"] = netlist_skipped;
  }
  j["transparency"] = {{"mean_applicable_rules", mean_applicable_rules},
                       {"mean_selected", mean_selected},
                       {"mean_discrepancy", mean_discrepancy}};
  j["equivalence_failures"] = equivalence_failures;
  j["infeasible"] = infeasible;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : files) {
    nlohmann::ordered_json f;
    f["file"] = r.file;
    f["top"] = r.top;
    f["set"] = r.eligible ? "eligible" : "clean";
    f["status"] = r.status;
    if (!r.error.empty()) f["error"] = r.error;
    if (r.eligible) {
      f["applicable_rules"] = r.applicable_rules;
      f["applicable_sites"] = r.applicable_sites;
      f["selected"] = r.selected;
      f["predicted_confidence"] = r.predicted_confidence;
      f["discrepancy"] = r.discrepancy;
      f["equivalence"] = r.equivalence;
    }
    f["detected"] = r.detected;
    f["score"] = r.score;
    f["confidence"] = r.confidence;
    f["name_dependent_score"] = r.name_dependent_score;
    if (r.attacked_detected) {
      f["attacked"] = {{"renamed", r.renamed},
                       {"detected", *r.attacked_detected},
                       {"score", r.attacked_score},
                       {"confidence", r.attacked_confidence}};
      if (!r.eligible) f["equivalence"] = r.equivalence;
    }
    if (r.netlist) {
      nlohmann::ordered_json n;
      n["status"] = r.netlist->status;
      n["found"] = r.netlist->found;
      n["payload_hex"] = r.netlist->payload_hex;
      if (r.eligible) n["expected_hex"] = r.netlist->expected_hex;
      if (!r.netlist->diagnostic.empty()) n["diagnostic"] = r.netlist->diagnostic;
      if (r.netlist->attacked_found) {
        n["attacked_found"] = *r.netlist->attacked_found;
        n["attacked_payload_hex"] = r.netlist->attacked_payload_hex;
      }
      f["netlist"] = n;
    }
    arr.push_back(f);
  }
  j["files"] = arr;
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_table() const {
  std::ostringstream o;
  auto row = [&](const char* name, const RateBlock& b) {
    o << name << "  ACC " << fmt("%6.2f", b.acc()) << "  TPR " << fmt("%6.2f", b.tpr()) << "  FPR "
      << fmt("%6.2f", b.fpr()) << "  (tp " << b.tp << ", fn " << b.fn << ", tn " << b.tn << ", fp " << b.fp
      << ")\n";
  };
  row("detection", detection);
  if (attacked) row("attacked ", *attacked);
  if (netlist) {
    row("netlist  ", *netlist);
    if (netlist_skipped) o << "netlist skipped: " << netlist_skipped << "\n";
  }
  o << "mean applicable rules " << fmt("%.2f", mean_applicable_rules) << ", mean selected "
    << fmt("%.2f", mean_selected) << ", mean D " << fmt("%.4f", mean_discrepancy) << "\n";
  o << "equivalence failures " << equivalence_failures << ", infeasible plans " << infeasible << "\n\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-30s %10s %8s %-22s %8s %7s %7s\n", "file", "applicable", "selected",
                "rules", "D", "conf", "atk");
  o << line;
  for (const auto& r : files) {
    if (!r.eligible) continue;
    std::string rules;
    for (const auto& s : r.selected) rules += (rules.empty() ? "" : ",") + s;
    if (r.status != "ok") rules = r.status;
    std::string atk = r.attacked_detected ? fmt("%.4f", r.attacked_confidence) : "-";
    std::snprintf(line, sizeof line, "%-30s %10zu %8zu %-22s %8.4f %7.4f %7s\n", r.file.c_str(), r.applicable_rules,
                  r.selected.size(), rules.c_str(), r.discrepancy, r.confidence, atk.c_str());
    o << line;
  }
  return o.str();
}

}  // namespace rtlmark
