// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "rtlmark/embedder.hpp"
#include "rtlmark/equivalence.hpp"
#include "rtlmark/netlist.hpp"

namespace rtlmark {

/// Tool settings. File format (JSON, every field optional):
///
///   {"key": "mark.key", "null_model": "null.json", "tau": 0.95,
///    "objective": {"m": 1, "n": 0},
///    "synth": {"command": "...", "timeout_seconds": 120},
///    "equivalence": {"exhaustive_bits": 12, "random_vectors": 1000,
///                    "sequential_cycles": 1000, "seed": 1},
///    "workers": 4}
struct Config {
  std::string key_file;
  std::string null_model_file;
  EmbedObjective objective;
  SynthConfig synth;
  EquivalenceBudget budget;
  size_t workers = 4;

  /// Throws Error on out-of-range values.
  void validate() const;

  /// Defaults when `path` does not exist. Throws Error on malformed JSON,
  /// unknown fields or invalid values.
  static Config load(const std::string& path);
  static Config parse(const std::string& text);
};

}  // namespace rtlmark
