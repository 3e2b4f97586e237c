// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlmark/crypto.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace rtlmark {

// ---------------------------------------------------------------- synthesis

struct SynthConfig {
  /// Shell command with {input}, {output} and {top} placeholders. Empty
  /// selects the default Yosys flow.
  std::string command;
  int timeout_seconds = 120;
  bool keep_workdir = false;

  /// Default template; RTLMARK_SYNTH overrides it.
  static std::string default_command();
  std::string resolved_command() const;
};

/// Runs the external tool on `source`. Throws ToolMissing, ToolFailed or Timeout.
vlog::SourceText synthesize(const vlog::SourceText& source, const std::string& top,
                            const SynthConfig& cfg = {});

/// True when the resolved command's program can be found.
bool synthesis_available(const SynthConfig& cfg = {});

// ------------------------------------------------------------------ netlist

using NetBit = int;  // index into NetlistGraph::bits; kConst0 / kConst1 / kConstX are reserved
inline constexpr NetBit kConst0 = 0;
inline constexpr NetBit kConst1 = 1;
inline constexpr NetBit kConstX = 2;

struct NetlistCell {
  std::string type;  // "$_AND_", "$_SDFF_PP0_", ...
  std::string name;
  std::map<std::string, NetBit> pins;
};

struct NetlistPort {
  std::string name;
  vlog::Direction dir = vlog::Direction::Input;
  std::vector<NetBit> bits;  // LSB first
};

struct NetlistGraph {
  std::string module;
  std::vector<std::string> bit_names;  // "name[i]" or "name"
  std::vector<NetlistPort> ports;
  std::vector<NetlistCell> cells;
  std::map<std::string, std::vector<NetBit>> nets;  // declared nets, LSB first

  const NetlistPort* port(const std::string& name) const;
};

/// Parses structural Verilog as written by Yosys (`write_verilog -noattr
/// -noexpr`). Picks `top` when given, else the last module. Throws ParseError.
NetlistGraph parse_netlist(const vlog::SourceText& text, const std::string& top = {});

struct NetlistEvidence {
  bool found = false;
  Bytes payload_bytes;  // carrier value, LSB-first bytes
  std::string trigger_net;
  std::string carrier_net;
  std::vector<std::string> trace;  // cells in the traced cone
  CarrierCheck check = CarrierCheck::NoMatch;
  std::optional<std::pair<std::string, std::string>> signatures;  // when the full frame fits
  std::string diagnostic;
};

/// Searches for a 1-bit input C that, held at 1, drives an output bus to a
/// constant carrying the key's tag. Constants are proved by ternary
/// propagation through the next-state cone, then by exhaustive evaluation of
/// each undecided bit over its own cone. Bits whose cone exceeds
/// `max_cone_inputs` free inputs stay unproved. When no single input works,
/// C is tried with one other input held at a fixed level. `expected_width`
/// of 0 accepts any bus of at least 8 bits.
NetlistEvidence trace_watermark(const NetlistGraph& g, const WatermarkKey& key, int expected_width = 0,
                                int max_cone_inputs = 20);

}  // namespace rtlmark
