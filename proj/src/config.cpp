// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "rtlmark/errors.hpp"

namespace rtlmark {

void Config::validate() const {
  objective.validate();
  if (synth.timeout_seconds <= 0) throw Error("synth.timeout_seconds must be positive");
  if (budget.exhaustive_bits < 0 || budget.exhaustive_bits > 24)
    throw Error("equivalence.exhaustive_bits must lie in 0..24");
  if (budget.random_vectors < 0 || budget.sequential_cycles < 0)
    throw Error("equivalence vector counts must be non-negative");
  if (workers == 0 || workers > 256) throw Error("workers must lie in 1..256");
}

namespace {

void only(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items())
    if (!ok.count(k)) throw Error("unknown config field " + where + "." + k);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  try {
    auto j = nlohmann::json::parse(text);
    only(j, "config", {"key", "null_model", "tau", "objective", "synth", "equivalence", "workers"});
    c.key_file = j.value("key", c.key_file);
    c.null_model_file = j.value("null_model", c.null_model_file);
    c.objective.tau = j.value("tau", c.objective.tau);
    if (j.contains("objective")) {
      const auto& o = j["objective"];
      only(o, "objective", {"m", "n"});
      c.objective.m = o.value("m", c.objective.m);
      c.objective.n = o.value("n", c.objective.n);
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      only(s, "synth", {"command", "timeout_seconds"});
      c.synth.command = s.value("command", c.synth.command);
      c.synth.timeout_seconds = s.value("timeout_seconds", c.synth.timeout_seconds);
    }
    if (j.contains("equivalence")) {
      const auto& e = j["equivalence"];
      only(e, "equivalence", {"exhaustive_bits", "random_vectors", "sequential_cycles", "seed"});
      c.budget.exhaustive_bits = e.value("exhaustive_bits", c.budget.exhaustive_bits);
      c.budget.random_vectors = e.value("random_vectors", c.budget.random_vectors);
      c.budget.sequential_cycles = e.value("sequential_cycles", c.budget.sequential_cycles);
      c.budget.seed = e.value("seed", c.budget.seed);
    }
    if (j.contains("workers")) {
      long w = j["workers"].get<long>();
      if (w <= 0) throw Error("workers must lie in 1..256");
      c.workers = static_cast<size_t>(w);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

Config Config::load(const std::string& path) {
  if (!std::filesystem::exists(path)) return Config{};
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace rtlmark
