// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "rtlmark/equivalence.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/sim.hpp"
#include "rtlmark/verilog/parser.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;

namespace {

Ast parse_text(const std::string& s) { return parse(SourceText{s, "t.v"}); }

const char* kCounter =
    "module cnt2(input clk, input rst, output reg [1:0] q);\n"
    "  always @(posedge clk) begin\n"
    "    if (rst) q <= 2'd0;\n"
    "    else q <= q + 2'd1;\n"
    "  end\n"
    "endmodule\n";

}  // namespace

TEST(Simulator, Inverter) {
  Ast ast = parse_text("module inv(input a, output y); assign y = ~a; endmodule");
  Simulator s(ast, "inv");
  EXPECT_FALSE(s.is_sequential());
  s.step({{"a", BitVec(1, 0)}});
  EXPECT_EQ(s.outputs_now().at("y").to_u64(), 1u);
  s.step({{"a", BitVec(1, 1)}});
  EXPECT_EQ(s.outputs_now().at("y").to_u64(), 0u);
}

TEST(Simulator, TwoBitCounterCountsFromReset) {
  Ast ast = parse_text(kCounter);
  Simulator s(ast, "cnt2");
  ASSERT_TRUE(s.is_sequential());
  ASSERT_EQ(s.edge_inputs(), std::vector<std::string>{"clk"});
  s.step({{"clk", BitVec(1, 0)}, {"rst", BitVec(1, 1)}});
  s.step({{"clk", BitVec(1, 1)}});
  std::vector<uint64_t> seen;
  for (int i = 0; i < 4; ++i) {
    seen.push_back(s.outputs_now().at("q").to_u64());
    s.step({{"clk", BitVec(1, 0)}, {"rst", BitVec(1, 0)}});
    s.step({{"clk", BitVec(1, 1)}});
  }
  EXPECT_EQ(seen, (std::vector<uint64_t>{0, 1, 2, 3}));
}

TEST(Simulator, RegistersStartUnknown) {
  Ast ast = parse_text(kCounter);
  Simulator s(ast, "cnt2");
  s.step({{"clk", BitVec(1, 0)}, {"rst", BitVec(1, 0)}});
  EXPECT_TRUE(s.outputs_now().at("q").has_unknown());
}

TEST(Simulator, NonblockingSwap) {
  Ast ast = parse_text(
      "module sw(input clk, input ld, output reg [3:0] a, output reg [3:0] b);\n"
      "always @(posedge clk) if (ld) begin a <= 4'd3; b <= 4'd9; end\n"
      "  else begin a <= b; b <= a; end\nendmodule\n");
  Simulator s(ast, "sw");
  s.step({{"clk", BitVec(1, 0)}, {"ld", BitVec(1, 1)}});
  s.step({{"clk", BitVec(1, 1)}});
  s.step({{"clk", BitVec(1, 0)}, {"ld", BitVec(1, 0)}});
  s.step({{"clk", BitVec(1, 1)}});
  EXPECT_EQ(s.value("a").to_u64(), 9u);
  EXPECT_EQ(s.value("b").to_u64(), 3u);
}

TEST(Simulator, AsyncResetFiresOnNegedge) {
  Ast ast = parse_text(
      "module ar(input clk, input rst_n, output reg [3:0] q);\n"
      "always @(posedge clk or negedge rst_n)\n"
      "  if (!rst_n) q <= 4'd0; else q <= q + 4'd1;\nendmodule\n");
  Simulator s(ast, "ar");
  s.step({{"clk", BitVec(1, 0)}, {"rst_n", BitVec(1, 1)}});
  s.step({{"rst_n", BitVec(1, 0)}});
  EXPECT_EQ(s.value("q").to_u64(), 0u);
  s.step({{"rst_n", BitVec(1, 1)}});
  s.step({{"clk", BitVec(1, 1)}});
  EXPECT_EQ(s.value("q").to_u64(), 1u);
}

TEST(Simulator, CasezWildcard) {
  Ast ast = parse_text(
      "module pe(input [2:0] r, output reg [1:0] g);\n"
      "always @* casez (r)\n"
      "  3'b1??: g = 2'd2;\n  3'b01?: g = 2'd1;\n  default: g = 2'd0;\n"
      "endcase\nendmodule\n");
  Simulator s(ast, "pe");
  s.step({{"r", BitVec(3, 0b101)}});
  EXPECT_EQ(s.value("g").to_u64(), 2u);
  s.step({{"r", BitVec(3, 0b011)}});
  EXPECT_EQ(s.value("g").to_u64(), 1u);
  s.step({{"r", BitVec(3, 0b001)}});
  EXPECT_EQ(s.value("g").to_u64(), 0u);
}

TEST(Simulator, InstancesAreUnsupported) {
  Ast ast = parse_text(
      "module leaf(input a, output y); assign y = a; endmodule\n"
      "module top(input a, output y); leaf u0(.a(a), .y(y)); endmodule\n");
  EXPECT_THROW(Simulator(ast, "top"), UnsupportedConstruct);
}

TEST(Equivalence, DeMorganIsExhaustivelyEquivalent) {
  Ast a = parse_text("module g(input a, input b, input c, output y); assign y = (a & b) | c; endmodule");
  Ast b = parse_text("module g(input a, input b, input c, output y); assign y = ~(~a | ~b) | c; endmodule");
  auto v = check_equivalence(a, b);
  EXPECT_EQ(v.kind, EquivalenceVerdict::Kind::EquivalentExhaustive);
  EXPECT_EQ(v.vectors, 8u);
  EXPECT_EQ(v.to_string(), "equivalent-exhaustive");
}

TEST(Equivalence, BrokenTransformYieldsCounterexample) {
  Ast a = parse_text("module g(input a, input b, input c, output y); assign y = (a & b) | c; endmodule");
  Ast b = parse_text("module g(input a, input b, input c, output y); assign y = (a | b) | c; endmodule");
  auto v = check_equivalence(a, b);
  ASSERT_FALSE(v.equivalent());
  EXPECT_NE(v.counterexample.find("output y"), std::string::npos);
  EXPECT_EQ(v.to_string().rfind("inequivalent(", 0), 0u);
}

TEST(Equivalence, WideCombinationalIsSampled) {
  Ast a = parse_text("module ad(input [7:0] a, input [7:0] b, output [8:0] s); assign s = a + b; endmodule");
  Ast b = parse_text("module ad(input [7:0] a, input [7:0] b, output [8:0] s); assign s = b + a; endmodule");
  auto v = check_equivalence(a, b);
  EXPECT_EQ(v.to_string(), "equivalent-sampled(1000)");
}

TEST(Equivalence, SequentialMismatchFound) {
  Ast a = parse_text(kCounter);
  std::string broken = kCounter;
  broken.replace(broken.find("q + 2'd1"), 8, "q + 2'd2");
  Ast b = parse_text(broken);
  EXPECT_FALSE(check_equivalence(a, b).equivalent());
  EXPECT_EQ(check_equivalence(a, a).to_string(), "equivalent-sampled(1000)");
}

TEST(Equivalence, ExtraInputTiedLow) {
  Ast a = parse_text("module t(input clk, output reg [7:0] q); always @(posedge clk) q <= q + 8'd1; endmodule");
  Ast b = parse_text(
      "module t(input clk, input watermark_trigger, output reg [7:0] q);\n"
      "always @(posedge clk) begin q <= q + 8'd1; if (watermark_trigger) q <= 8'hA5; end\nendmodule\n");
  EXPECT_TRUE(check_equivalence(a, b).equivalent());
}

TEST(Equivalence, OutputPortMismatchIsInequivalent) {
  Ast a = parse_text("module t(input a, output y); assign y = a; endmodule");
  Ast b = parse_text("module t(input a, output [1:0] y); assign y = {a, a}; endmodule");
  EXPECT_FALSE(check_equivalence(a, b).equivalent());
}
