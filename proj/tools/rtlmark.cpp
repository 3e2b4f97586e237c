// SPDX-License-Identifier: Apache-2.0
// rtlmark: command-line front end.
#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "rtlmark/config.hpp"
#include "rtlmark/detector.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/harness.hpp"
#include "rtlmark/netlist.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/rules.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace fs = std::filesystem;
using namespace rtlmark;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitSoftware = 70;
constexpr int kExitIo = 74;

struct UsageError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

struct Common {
  std::string config_path = "rtlmark.json";
  std::string key_path;
  std::string null_path;
  double tau = -1.0;
  Config cfg;

  void load() {
    try {
      cfg = Config::load(config_path);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (tau >= 0.0) cfg.objective.tau = tau;
    if (!null_path.empty()) cfg.null_model_file = null_path;
    if (!key_path.empty()) cfg.key_file = key_path;
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

  WatermarkKey key() const {
    if (cfg.key_file.empty()) throw UsageError("--key is required");
    if (!fs::exists(cfg.key_file)) throw IoError("key file not found: " + cfg.key_file);
    return load_key(cfg.key_file);
  }

  NullModel null_model() const {
    if (cfg.null_model_file.empty()) return NullModel::defaults();
    return NullModel::from_json(read_file(cfg.null_model_file));
  }
};

void add_common(CLI::App* sub, Common& c, bool with_key = true) {
  sub->add_option("--config", c.config_path, "Config file (defaults when absent)");
  if (with_key) {
    sub->add_option("--key", c.key_path, "Key file");
    sub->add_option("--null-model", c.null_path, "Null model from calibrate");
    sub->add_option("--tau", c.tau, "Detection threshold")->check(CLI::Range(0.0, 1.0));
  }
}

std::pair<std::string, std::string> parse_payload(const std::string& spec) {
  std::string model = "model", dev = "developer";
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("payload entries look like model=NAME,dev=NAME");
    std::string k = part.substr(0, eq), v = part.substr(eq + 1);
    if (k == "model")
      model = v;
    else if (k == "dev" || k == "developer")
      dev = v;
    else
      throw UsageError("unknown payload field '" + k + "'");
  }
  return {model, dev};
}

json report_json(const DetectionReport& r, double tau) {
  json j;
  j["watermarked"] = r.watermarked;
  j["confidence"] = r.confidence;
  j["score"] = r.score;
  j["tau"] = tau;
  json rules = json::array();
  for (const auto& c : r.breakdown) {
    if (!c.present) continue;
    rules.push_back({{"rule", rule_code(c.rule)}, {"llr", c.llr}, {"name_dependent", c.name_dependent}});
  }
  j["evidence"] = rules;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

json evidence_json(const NetlistEvidence& ev) {
  json j;
  j["found"] = ev.found;
  if (ev.found) {
    j["trigger_net"] = ev.trigger_net;
    j["carrier_net"] = ev.carrier_net;
    j["payload_hex"] = to_hex(ev.payload_bytes);
    j["frame"] = ev.check == CarrierCheck::FullFrame ? "full" : "tag-only";
    if (ev.signatures) {
      j["model_signature"] = ev.signatures->first;
      j["developer_signature"] = ev.signatures->second;
    }
    j["trace_cells"] = ev.trace.size();
  }
  if (!ev.diagnostic.empty()) j["diagnostic"] = ev.diagnostic;
  return j;
}

std::string pad(const std::string& s, size_t n) { return s.size() >= n ? s : s + std::string(n - s.size(), ' '); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtlmark: keyed, semantics-preserving watermarks for Verilog RTL"};
  app.require_subcommand(1);
  std::function<int()> action;
  Common common;

  // keygen
  std::string keygen_out;
  bool keygen_force = false;
  auto* keygen = app.add_subcommand("keygen", "Write a new random key file");
  keygen->add_option("-o,--output", keygen_out, "Key file to create")->required();
  keygen->add_flag("--force", keygen_force, "Overwrite an existing file");
  keygen->callback([&] {
    action = [&] {
      if (fs::exists(keygen_out) && !keygen_force) throw UsageError(keygen_out + " exists; pass --force");
      WatermarkKey k = WatermarkKey::generate();
      save_key(keygen_out, k);
      std::cout << "key " << k.key_id() << " written to " << keygen_out << "\n";
      return 0;
    };
  });

  // embed
  std::string embed_in, embed_out, embed_payload;
  auto* embed_cmd = app.add_subcommand("embed", "Watermark a Verilog file");
  embed_cmd->add_option("input", embed_in, "Input .v")->required();
  embed_cmd->add_option("-o,--output", embed_out, "Watermarked .v")->required();
  embed_cmd->add_option("--payload", embed_payload, "model=NAME,dev=NAME");
  add_common(embed_cmd, common);
  embed_cmd->callback([&] {
    action = [&] {
      common.load();
      WatermarkKey key = common.key();
      auto [model, dev] = parse_payload(embed_payload);
      Payload payload = encode_payload(model, dev, key);
      vlog::SourceText src{read_file(embed_in), embed_in};
      vlog::Ast ast = vlog::parse(src);
      TransformPlan p = plan(ast, key, payload, common.cfg.objective, PlannerOptions{common.null_model()});
      WatermarkedDocument doc = embed(ast, p, key, payload);
      write_file(embed_out, doc.source.content);
      Manifest m = Manifest::from_document(src, doc, key, payload, common.cfg.objective.tau);
      write_file(embed_out + ".manifest.json", m.to_json());
      json j;
      j["output"] = embed_out;
      j["manifest"] = embed_out + ".manifest.json";
      j["predicted_confidence"] = p.predicted_confidence;
      j["applicable_rules"] = p.applicable_rules;
      json rules = json::array();
      for (const auto& s : p.selected) rules.push_back(rule_code(s.rule));
      j["selected"] = rules;
      std::cout << j.dump(2) << "\n";
      return 0;
    };
  });

  // detect
  std::string detect_in;
  auto* detect_cmd = app.add_subcommand("detect", "Score a Verilog file; exit 0 watermarked, 1 clean, 2 error");
  detect_cmd->add_option("input", detect_in, "Input .v")->required();
  add_common(detect_cmd, common);
  detect_cmd->callback([&] {
    action = [&] {
      common.load();
      WatermarkKey key = common.key();
      try {
        vlog::SourceText src{read_file(detect_in), detect_in};
        DetectionReport r = detect(vlog::parse(src), key, common.null_model(), common.cfg.objective.tau);
        std::cout << report_json(r, common.cfg.objective.tau).dump(2) << "\n";
        return r.watermarked ? 0 : 1;
      } catch (const std::exception& e) {
        std::cerr << "rtlmark: " << e.what() << "\n";
        return 2;
      }
    };
  });

  // netlist-detect
  std::string nl_in, nl_top;
  bool nl_is_netlist = false;
  auto* nl_cmd = app.add_subcommand("netlist-detect",
                                    "Synthesize, trace the gated carrier and decode it; exit 0 found, 1 not, 2 error");
  nl_cmd->add_option("input", nl_in, "Input .v")->required();
  nl_cmd->add_option("--top", nl_top, "Top module (default: last module)");
  nl_cmd->add_flag("--netlist-input", nl_is_netlist, "Input is already a synthesized netlist");
  add_common(nl_cmd, common);
  nl_cmd->callback([&] {
    action = [&] {
      common.load();
      WatermarkKey key = common.key();
      try {
        vlog::SourceText src{read_file(nl_in), nl_in};
        std::string top = nl_top;
        vlog::SourceText net = src;
        if (!nl_is_netlist) {
          if (top.empty()) {
            vlog::Ast ast = vlog::parse(src);
            if (ast.modules.empty()) throw Error("no module in " + nl_in);
            top = ast.modules.back().name;
          }
          net = synthesize(src, top, common.cfg.synth);
        }
        auto t0 = std::chrono::steady_clock::now();
        NetlistEvidence ev = trace_watermark(parse_netlist(net, top), key);
        json j = evidence_json(ev);
        j["trace_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << j.dump(2) << "\n";
        return ev.found ? 0 : 1;
      } catch (const std::exception& e) {
        std::cerr << "rtlmark: " << e.what() << "\n";
        return 2;
      }
    };
  });

  // attack
  std::string atk_in, atk_out;
  AttackSpec atk;
  auto* atk_cmd = app.add_subcommand("attack", "Rename a fraction of identifiers to random names");
  atk_cmd->add_option("input", atk_in, "Input .v")->required();
  atk_cmd->add_option("-o,--output", atk_out, "Attacked .v")->required();
  atk_cmd->add_option("--fraction", atk.fraction, "Share of renameable identifiers")->check(CLI::Range(0.0, 1.0));
  atk_cmd->add_option("--seed", atk.seed, "Random seed");
  atk_cmd->add_option("--min-len", atk.min_len, "Shortest fresh name");
  atk_cmd->add_option("--max-len", atk.max_len, "Longest fresh name");
  atk_cmd->callback([&] {
    action = [&] {
      try {
        atk.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      AttackResult r = rename_attack({read_file(atk_in), atk_in}, atk);
      write_file(atk_out, r.source.content);
      std::cout << "renamed " << r.renamed.size() << " identifiers\n";
      return 0;
    };
  });

  // evaluate
  std::string ev_dir, ev_out = ".", ev_payload;
  double ev_attack = 0.0;
  uint64_t ev_seed = 1;
  bool ev_netlist = false;
  size_t ev_workers = 0;
  auto* ev_cmd = app.add_subcommand("evaluate", "Run the embed/detect protocol over a corpus");
  ev_cmd->add_option("corpus", ev_dir, "Corpus directory")->required();
  ev_cmd->add_option("--attack", ev_attack, "Rename fraction applied before detection")->check(CLI::Range(0.0, 1.0));
  ev_cmd->add_option("--seed", ev_seed, "Attack seed");
  ev_cmd->add_flag("--netlist", ev_netlist, "Also synthesize and trace");
  ev_cmd->add_option("--out", ev_out, "Directory for report.json and report.txt");
  ev_cmd->add_option("--workers", ev_workers, "Worker threads");
  ev_cmd->add_option("--payload", ev_payload, "model=NAME,dev=NAME");
  add_common(ev_cmd, common);
  ev_cmd->callback([&] {
    action = [&] {
      common.load();
      EvalConfig ec;
      ec.key = common.key();
      ec.null = common.null_model();
      ec.objective = common.cfg.objective;
      std::tie(ec.model_signature, ec.developer_signature) = parse_payload(ev_payload);
      if (ev_attack > 0.0) ec.attack = AttackSpec{ev_attack, ev_seed};
      ec.netlist = ev_netlist;
      ec.synth = common.cfg.synth;
      ec.budget = common.cfg.budget;
      ec.workers = ev_workers ? ev_workers : common.cfg.workers;
      if (ev_netlist && !synthesis_available(ec.synth))
        std::cerr << "rtlmark: warning: synthesis tool not found; netlist rows will be skipped\n";
      Corpus corpus = load_corpus(ev_dir);
      auto t0 = std::chrono::steady_clock::now();
      MetricsReport m = evaluate(corpus, ec);
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      fs::create_directories(ev_out);
      write_file((fs::path(ev_out) / "report.json").string(), m.to_json());
      write_file((fs::path(ev_out) / "report.txt").string(), m.to_table());
      std::cout << m.to_table();
      std::cerr << "rtlmark: evaluated " << m.files.size() << " files in " << std::fixed << std::setprecision(1)
                << secs << " s\n";
      if (m.equivalence_failures) {
        std::cerr << "rtlmark: " << m.equivalence_failures << " equivalence failure(s)\n";
        return kExitSoftware;
      }
      return 0;
    };
  });

  // calibrate
  std::string cal_dir, cal_out;
  auto* cal_cmd = app.add_subcommand("calibrate", "Estimate per-rule null rates from clean code");
  cal_cmd->add_option("corpus", cal_dir, "Corpus directory (its clean set, or every .v file)")->required();
  cal_cmd->add_option("-o,--output", cal_out, "Null model file")->required();
  add_common(cal_cmd, common);
  cal_cmd->callback([&] {
    action = [&] {
      common.load();
      WatermarkKey key = common.key();
      if (!fs::is_directory(cal_dir)) throw IoError("corpus directory not found: " + cal_dir);
      std::vector<vlog::SourceText> files;
      Corpus c = load_corpus(cal_dir);
      for (const auto& e : c.clean) files.push_back(e.source);
      if (files.empty()) {
        std::vector<std::string> paths;
        for (const auto& e : fs::recursive_directory_iterator(cal_dir))
          if (e.is_regular_file() && e.path().extension() == ".v") paths.push_back(e.path().string());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) files.push_back({read_file(p), p});
      }
      NullModel nm = calibrate(files, key);
      write_file(cal_out, nm.to_json());
      std::cout << "calibrated on " << nm.corpus_size << " files; written to " << cal_out << "\n";
      return 0;
    };
  });

  // rules
  bool rules_json = false;
  auto* rules_cmd = app.add_subcommand("rules", "List the transformation catalog");
  rules_cmd->add_flag("--json", rules_json, "Machine-readable output");
  rules_cmd->callback([&] {
    action = [&] {
      if (rules_json) {
        json arr = json::array();
        for (const auto& r : rule_catalog())
          arr.push_back({{"rule", r.code},
                         {"name", r.name},
                         {"granularity", r.granularity == Granularity::Token ? "token" : "statement"},
                         {"keyed", r.keyed},
                         {"name_dependent", r.name_dependent},
                         {"contribution", nominal_contribution(r.id)},
                         {"effect", r.effect},
                         {"applicability", r.applicability}});
        std::cout << arr.dump(2) << "\n";
        return 0;
      }
      std::cout << pad("rule", 6) << pad("name", 34) << pad("granularity", 13) << pad("keyed", 7)
                << pad("rename", 8) << "contribution\n";
      for (const auto& r : rule_catalog()) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(2) << nominal_contribution(r.id);
        std::cout << pad(r.code, 6) << pad(r.name, 34)
                  << pad(r.granularity == Granularity::Token ? "token" : "statement", 13)
                  << pad(r.keyed ? "yes" : "no", 7) << pad(r.name_dependent ? "lost" : "kept", 8) << c.str()
                  << "\n";
      }
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "rtlmark: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "rtlmark: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "rtlmark: " << e.what() << "\n";
    return kExitData;
  } catch (const InsufficientCapacity& e) {
    std::cerr << "rtlmark: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "rtlmark: internal error: " << e.what() << "\n";
    return kExitSoftware;
  }
}
