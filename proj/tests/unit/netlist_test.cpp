// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "rtlmark/embedder.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/harness.hpp"
#include "rtlmark/netlist.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/verilog/printer.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;

namespace {

constexpr uint64_t kGoldenSeed = 877;  // payload tag 0xA5

SourceText nl(const std::string& s) { return SourceText{s, "n.v"}; }

const char* kNand =
    "module nand_inv(a, b, y);\n"
    "  input a;\n  wire a;\n  input b;\n  wire b;\n  output y;\n  wire y;\n  wire _0_;\n"
    "  \\$_NAND_  _1_ (\n    .A(a),\n    .B(b),\n    .Y(_0_)\n  );\n"
    "  \\$_NOT_  _2_ (\n    .A(_0_),\n    .Y(y)\n  );\n"
    "endmodule\n";

enum class Gate { Plain, ResetDominated, Ungated, XorCone };

// Eight flops. In the gated variants `trig` selects the constant `value`;
// XorCone derives each constant bit from x ^ x over an n-input parity chain.
std::string gated_register(uint8_t value, Gate gate, int n = 0) {
  std::ostringstream o;
  o << "module carrier(clk, trig, rst, d, x, q);\n"
    << "  input clk;\n  wire clk;\n  input trig;\n  wire trig;\n  input rst;\n  wire rst;\n"
    << "  input [7:0] d;\n  wire [7:0] d;\n  input [" << std::max(n, 1) - 1 << ":0] x;\n  wire ["
    << std::max(n, 1) - 1 << ":0] x;\n  output [7:0] q;\n  reg [7:0] q;\n";
  int id = 0;
  auto cell = [&](const std::string& type, std::initializer_list<std::pair<const char*, std::string>> pins) {
    o << "  \\" << type << "  _c" << id++ << "_ (\n";
    size_t k = 0;
    for (const auto& [p, net] : pins) o << "    ." << p << "(" << net << ")" << (++k < pins.size() ? ",\n" : "\n");
    o << "  );\n";
  };
  std::string zero = "1'h0", one = "1'h1";
  if (gate == Gate::XorCone) {
    o << "  wire [" << n - 1 << ":0] chain;\n  wire zero_w;\n  wire one_w;\n";
    cell("$_BUF_", {{"A", "x[0]"}, {"Y", "chain[0]"}});
    for (int i = 1; i < n; ++i)
      cell("$_XOR_", {{"A", "chain[" + std::to_string(i - 1) + "]"}, {"B", "x[" + std::to_string(i) + "]"},
                      {"Y", "chain[" + std::to_string(i) + "]"}});
    std::string top = "chain[" + std::to_string(n - 1) + "]";
    cell("$_XOR_", {{"A", top}, {"B", top}, {"Y", "zero_w"}});
    cell("$_XNOR_", {{"A", top}, {"B", top}, {"Y", "one_w"}});
    zero = "zero_w";
    one = "one_w";
  }
  o << "  wire [7:0] sel;\n  wire [7:0] nxt;\n";
  for (int i = 0; i < 8; ++i) {
    std::string bit = "[" + std::to_string(i) + "]";
    std::string k = ((value >> i) & 1) ? one : zero;
    if (gate == Gate::Ungated) {
      cell("$_BUF_", {{"A", k}, {"Y", "nxt" + bit}});
    } else {
      cell("$_MUX_", {{"A", "d" + bit}, {"B", k}, {"S", "trig"}, {"Y", "sel" + bit}});
      if (gate == Gate::ResetDominated)
        cell("$_MUX_", {{"A", "sel" + bit}, {"B", "1'h0"}, {"S", "rst"}, {"Y", "nxt" + bit}});
      else
        cell("$_BUF_", {{"A", "sel" + bit}, {"Y", "nxt" + bit}});
    }
    cell("$_DFF_P_", {{"C", "clk"}, {"D", "nxt" + bit}, {"Q", "q" + bit}});
  }
  o << "endmodule\n";
  return o.str();
}

const char* kCounter =
    "module counter(input clk, input rst, input en, output reg [7:0] count);\n"
    "  wire [7:0] inc;\n"
    "  assign inc = count + 8'd1;\n"
    "  always @(posedge clk)\n"
    "    if (rst) count <= 8'h00;\n"
    "    else if (en) count <= inc;\n"
    "endmodule\n";

SourceText with_trigger(const WatermarkKey& key) {
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  Ast ast = parse(SourceText{kCounter, "counter.v"});
  auto sites = applicable_sites(ast, RuleId::T15, key);
  if (sites.empty()) throw Error("no trigger site");
  return print(apply(ast, sites[0], key, payload).first);
}

bool have_synth() {
  if (synthesis_available()) return true;
  std::cerr << "[ SKIPPED  ] synthesis tool not found\n";
  return false;
}

}  // namespace

TEST(NetlistParse, TwoCellNandInverter) {
  NetlistGraph g = parse_netlist(nl(kNand));
  EXPECT_EQ(g.module, "nand_inv");
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_EQ(g.cells[0].type, "$_NAND_");
  EXPECT_EQ(g.cells[1].type, "$_NOT_");
  EXPECT_EQ(g.nets.size(), 4u);
  ASSERT_NE(g.port("y"), nullptr);
  EXPECT_EQ(g.port("y")->dir, Direction::Output);
  EXPECT_EQ(g.cells[1].pins.at("A"), g.cells[0].pins.at("Y"));
}

TEST(NetlistParse, EscapedIdentifiersAreKeptVerbatim) {
  std::string text =
      "module m(clk, d, q);\n  input clk;\n  input d;\n  output q;\n  wire \\a.b ;\n"
      "  \\$_NOT_  \\u$inv[0]  (\n    .A(d),\n    .Y(\\a.b )\n  );\n"
      "  \\$_DFF_P_  \\q_reg  (\n    .C(clk),\n    .D(\\a.b ),\n    .Q(q)\n  );\n"
      "endmodule\n";
  NetlistGraph g = parse_netlist(nl(text));
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_EQ(g.cells[0].name, "u$inv[0]");
  EXPECT_EQ(g.cells[1].name, "q_reg");
  EXPECT_TRUE(g.nets.count("a.b"));
}

TEST(NetlistParse, BehaviouralInputIsRejected) {
  EXPECT_THROW(parse_netlist(nl("module m(input clk, output reg q);\n  always @(posedge clk) q <= ~q;\nendmodule\n")),
               ParseError);
  EXPECT_THROW(parse_netlist(nl("module m(a);\n  input a;\n")), ParseError);
}

TEST(NetlistParse, PicksRequestedTop) {
  std::string two = std::string(kNand) + gated_register(0x11, Gate::Plain);
  EXPECT_EQ(parse_netlist(nl(two)).module, "carrier");
  EXPECT_EQ(parse_netlist(nl(two), "nand_inv").module, "nand_inv");
  EXPECT_THROW(parse_netlist(nl(two), "absent"), Error);
}

TEST(NetlistTrace, GatedConstantYieldsGoldenByte) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  NetlistEvidence ev = trace_watermark(parse_netlist(nl(gated_register(0xA5, Gate::Plain))), key);
  ASSERT_TRUE(ev.found) << ev.diagnostic;
  EXPECT_EQ(ev.payload_bytes, Bytes{0xA5});
  EXPECT_EQ(ev.trigger_net, "trig");
  EXPECT_EQ(ev.carrier_net, "q");
  EXPECT_EQ(ev.check, CarrierCheck::TagOnly);
  EXPECT_FALSE(ev.trace.empty());
}

TEST(NetlistTrace, WrongTagIsNotReported) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  NetlistEvidence ev = trace_watermark(parse_netlist(nl(gated_register(0x5A, Gate::Plain))), key);
  EXPECT_FALSE(ev.found);
  EXPECT_FALSE(ev.diagnostic.empty());
}

TEST(NetlistTrace, ResetDominatedTriggerIsProvedWithResetReleased) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  NetlistEvidence ev = trace_watermark(parse_netlist(nl(gated_register(0xA5, Gate::ResetDominated))), key);
  ASSERT_TRUE(ev.found) << ev.diagnostic;
  EXPECT_EQ(ev.trigger_net, "trig");
  EXPECT_EQ(ev.payload_bytes, Bytes{0xA5});
  EXPECT_EQ(ev.diagnostic, "constant holds with rst=0");
}

TEST(NetlistTrace, ConstantWithoutControlIsNotReported) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  NetlistEvidence ev = trace_watermark(parse_netlist(nl(gated_register(0xA5, Gate::Ungated))), key);
  EXPECT_FALSE(ev.found);
}

TEST(NetlistTrace, WidthFilter) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  NetlistGraph g = parse_netlist(nl(gated_register(0xA5, Gate::Plain)));
  EXPECT_TRUE(trace_watermark(g, key, 8).found);
  NetlistEvidence ev = trace_watermark(g, key, 16);
  EXPECT_FALSE(ev.found);
  EXPECT_EQ(ev.diagnostic, "no output bus of the expected width");
}

// Each carrier bit's cone holds the parity inputs plus its own d bit.
TEST(NetlistTrace, ConeAboveBoundStaysUndecided) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  for (int n : {10, 19}) {
    NetlistEvidence ev = trace_watermark(parse_netlist(nl(gated_register(0xA5, Gate::XorCone, n))), key);
    ASSERT_TRUE(ev.found) << n << ": " << ev.diagnostic;
    EXPECT_EQ(ev.payload_bytes, Bytes{0xA5});
  }
  NetlistGraph big = parse_netlist(nl(gated_register(0xA5, Gate::XorCone, 20)));
  NetlistEvidence ev = trace_watermark(big, key);
  EXPECT_FALSE(ev.found);
  EXPECT_EQ(ev.diagnostic.rfind("cone exceeds 20 free inputs for:", 0), 0u) << ev.diagnostic;
  EXPECT_TRUE(trace_watermark(big, key, 0, 21).found);
}

TEST(Synthesis, MissingProgramIsToolMissing) {
  SynthConfig cfg;
  cfg.command = "rtlmark-no-such-tool {input} {output}";
  EXPECT_FALSE(synthesis_available(cfg));
  EXPECT_THROW(synthesize(nl(kCounter), "counter", cfg), ToolMissing);
}

TEST(Synthesis, SlowCommandTimesOut) {
  SynthConfig cfg;
  cfg.command = "sleep 5";
  cfg.timeout_seconds = 1;
  EXPECT_THROW(synthesize(nl(kCounter), "counter", cfg), Timeout);
}

TEST(Synthesis, FailingCommandReportsExitCodeAndOutput) {
  SynthConfig cfg;
  cfg.command = "echo broken-netlist-flow >&2; exit 3";
  try {
    synthesize(nl(kCounter), "counter", cfg);
    FAIL() << "expected ToolFailed";
  } catch (const ToolFailed& e) {
    EXPECT_EQ(e.exit_code(), 3);
    EXPECT_NE(e.stderr_excerpt().find("broken-netlist-flow"), std::string::npos);
  }
  cfg.command = "true";
  EXPECT_THROW(synthesize(nl(kCounter), "counter", cfg), ToolFailed);
}

TEST(Synthesis, EnvironmentOverridesCommand) {
  SynthConfig cfg;
  cfg.command = "exit 9";
  ::setenv("RTLMARK_SYNTH", "cp {input} {output}", 1);
  EXPECT_EQ(cfg.resolved_command(), "cp {input} {output}");
  SourceText out = synthesize(nl(kCounter), "counter", cfg);
  ::unsetenv("RTLMARK_SYNTH");
  EXPECT_EQ(out.content, kCounter);
  EXPECT_EQ(cfg.resolved_command(), "exit 9");
  EXPECT_THROW(synthesize(nl(kCounter), "bad top", cfg), Error);
}

TEST(Synthesis, WatermarkedCounterMapsToGateCells) {
  if (!have_synth()) GTEST_SKIP();
  SourceText out = synthesize(with_trigger(WatermarkKey::from_seed(kGoldenSeed)), "counter");
  EXPECT_NE(out.content.find("\\$_"), std::string::npos);
  NetlistGraph g = parse_netlist(out, "counter");
  EXPECT_FALSE(g.cells.empty());
  ASSERT_NE(g.port("watermark_trigger"), nullptr);
}

TEST(Synthesis, UndefinedModuleFailsWithToolOutput) {
  if (!have_synth()) GTEST_SKIP();
  std::string bad =
      "module top(input a, output y);\n  missing_cell u0(.a(a), .y(y));\nendmodule\n";
  try {
    synthesize(nl(bad), "top");
    FAIL() << "expected ToolFailed";
  } catch (const ToolFailed& e) {
    EXPECT_NE(e.exit_code(), 0);
    EXPECT_NE(e.stderr_excerpt().find("missing_cell"), std::string::npos) << e.stderr_excerpt();
  }
}

TEST(Synthesis, GoldenPayloadSurvivesSynthesisAndRenaming) {
  if (!have_synth()) GTEST_SKIP();
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  SourceText wm = with_trigger(key);
  for (const SourceText& s : {wm, rename_attack(wm, AttackSpec{1.0, 4}).source}) {
    NetlistEvidence ev = trace_watermark(parse_netlist(synthesize(s, "counter"), "counter"), key);
    ASSERT_TRUE(ev.found) << ev.diagnostic;
    ASSERT_FALSE(ev.payload_bytes.empty());
    EXPECT_EQ(ev.payload_bytes[0], 0xA5);
    EXPECT_EQ(ev.trigger_net, "watermark_trigger");
  }
  NetlistEvidence clean = trace_watermark(parse_netlist(synthesize(nl(kCounter), "counter"), "counter"), key);
  EXPECT_FALSE(clean.found);
}
