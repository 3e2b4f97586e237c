// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/parser.hpp"
#include "rtlmark/verilog/printer.hpp"
#include "rtlmark/verilog/symbols.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;

namespace {

Ast parse_text(const std::string& s) { return parse(SourceText{s, "t.v"}); }

const Always& first_always(const ModuleDecl& m) {
  for (const auto& it : m.items)
    if (auto* a = it.as<Always>()) return *a;
  throw std::runtime_error("no always");
}

}  // namespace

TEST(Parse, MinimalModule) {
  Ast ast = parse_text("module m(input a, output b); assign b = ~a; endmodule");
  ASSERT_EQ(ast.modules.size(), 1u);
  const auto& m = ast.modules[0];
  EXPECT_EQ(m.name, "m");
  ASSERT_EQ(m.ports.size(), 2u);
  EXPECT_EQ(m.ports[0].dir, Direction::Input);
  EXPECT_EQ(m.ports[1].dir, Direction::Output);
  ASSERT_EQ(m.items.size(), 1u);
  ASSERT_NE(m.items[0].as<ContAssign>(), nullptr);
  EXPECT_EQ(m.items[0].as<ContAssign>()->assigns.size(), 1u);
}

TEST(Parse, OrSeparatedSensitivityList) {
  Ast ast = parse_text(
      "module m(input clk1, input clk2, output reg q);\n"
      "always @(posedge clk1 or negedge clk2) q <= 1'b1;\nendmodule\n");
  const EventControl& ec = first_always(ast.modules[0]).control;
  ASSERT_EQ(ec.events.size(), 2u);
  EXPECT_EQ(ec.events[0].edge, Edge::Posedge);
  EXPECT_EQ(ec.events[0].signal.text, "clk1");
  EXPECT_EQ(ec.events[1].edge, Edge::Negedge);
  EXPECT_EQ(ec.events[1].signal.text, "clk2");
  EXPECT_EQ(ec.separator_style(), EventControl::Style::OrKeyword);
}

TEST(Parse, CommaSeparatedSensitivityList) {
  Ast ast = parse_text(
      "module m(input clk1, input clk2, output reg q);\n"
      "always @(posedge clk1 , negedge clk2) q <= 1'b1;\nendmodule\n");
  EXPECT_EQ(first_always(ast.modules[0]).control.separator_style(), EventControl::Style::Comma);
}

TEST(Parse, LocalparamLiterals) {
  Ast ast = parse_text("module m(input a); localparam RUN = 2'b10, STOP = 2'b11; endmodule");
  const auto* pd = ast.modules[0].items[0].as<ParamDecl>();
  ASSERT_NE(pd, nullptr);
  ASSERT_EQ(pd->params.size(), 2u);
  const NumberLiteral& run = pd->params[0].value.number;
  const NumberLiteral& stop = pd->params[1].value.number;
  EXPECT_EQ(pd->params[0].name, "RUN");
  EXPECT_EQ(run.width, 2);
  EXPECT_EQ(run.base(), Base::Binary);
  EXPECT_EQ(run.value.to_u64(), 2u);
  EXPECT_EQ(pd->params[1].name, "STOP");
  EXPECT_EQ(stop.width, 2);
  EXPECT_EQ(stop.base(), Base::Binary);
  EXPECT_EQ(stop.value.to_u64(), 3u);
}

TEST(Parse, NumberSpellingFields) {
  Expr e = parse_expression("8'b1010_0101");
  ASSERT_EQ(e.kind, ExprKind::Number);
  EXPECT_EQ(e.number.digits, "10100101");
  EXPECT_EQ(e.number.separators, std::vector<int>{4});
  // 0b10100101 = 128 + 32 + 4 + 1
  EXPECT_EQ(e.number.value.to_u64(), 128u + 32u + 4u + 1u);
  Expr u = parse_expression("42");
  EXPECT_FALSE(u.number.based);
  EXPECT_TRUE(u.number.is_signed);
  EXPECT_EQ(u.number.value.width(), 32);
  Expr x = parse_expression("4'bx1");
  EXPECT_TRUE(x.number.value.is_x(3));
  EXPECT_FALSE(x.number.value.is_x(0));
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(dump_expr(parse_expression("a | b & c")),
            "(binary | (id a) (binary & (id b) (id c)))");
  EXPECT_EQ(dump_expr(parse_expression("a - b - c")),
            "(binary - (binary - (id a) (id b)) (id c))");
  EXPECT_EQ(dump_expr(parse_expression("a ? b : c ? d : e")),
            "(ternary (id a) (id b) (ternary (id c) (id d) (id e)))");
  EXPECT_EQ(dump_expr(parse_expression("a == b && c < d")),
            "(binary && (binary == (id a) (id b)) (binary < (id c) (id d)))");
}

TEST(Parse, RejectsOutOfSubsetWithPosition) {
  try {
    parse_text("module m(input a);\n  generate\n  endgenerate\nendmodule\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position().line, 2);
    EXPECT_EQ(e.position().col, 3);
    EXPECT_NE(std::string(e.what()).find("t.v:2:3:"), std::string::npos);
  }
  EXPECT_THROW(parse_text("`define X 1\nmodule m(input a); endmodule"), ParseError);
  EXPECT_THROW(parse_text("module m(a); input a; endmodule"), ParseError);
  EXPECT_THROW(parse_text("module m(input a); reg [7:0] mem [0:3]; endmodule"), ParseError);
  EXPECT_THROW(parse_text("module m(input a, output b); assign b = a endmodule"), ParseError);
  EXPECT_THROW(parse_text("module m(input a, input a); endmodule"), ParseError);
}

TEST(Parse, ExpectedSetReported) {
  try {
    parse_text("module m(input a); assign = a; endmodule");
    FAIL();
  } catch (const ParseError& e) {
    ASSERT_FALSE(e.expected().empty());
    EXPECT_EQ(e.expected()[0], "identifier");
  }
}

TEST(Parse, CommentsAttachToFollowingNode) {
  Ast ast = parse_text(
      "module m(\n  // clock\n  input clk,\n  output reg q);\n"
      "  // state register\n  reg r;\n"
      "  always @(posedge clk) begin\n    // update\n    q <= r;\n  end\nendmodule\n");
  const auto& m = ast.modules[0];
  ASSERT_EQ(m.ports[0].comments.size(), 1u);
  EXPECT_EQ(m.ports[0].comments[0].text, "// clock");
  ASSERT_EQ(m.items[0].comments.size(), 1u);
  EXPECT_EQ(m.items[0].comments[0].text, "// state register");
  const Stmt& body = first_always(m).body;
  ASSERT_EQ(body.stmts[0].comments.size(), 1u);
  EXPECT_EQ(body.stmts[0].comments[0].text, "// update");
}

TEST(Print, HexLiteral) {
  NumberLiteral lit = make_number(8, 'h', BitVec(8, 0xA5), true);
  EXPECT_EQ(print_number(lit), "8'hA5");
}

TEST(Print, BinaryLiteralWithSeparator) {
  NumberLiteral lit = make_number(8, 'b', BitVec(8, 0xA5), false, {4});
  EXPECT_EQ(print_number(lit), "8'b1010_0101");
  // Independent conversion: 0xA5 = 165 = 0b10100101.
  int v = 0;
  for (char c : std::string("10100101")) v = v * 2 + (c - '0');
  EXPECT_EQ(v, 0xA5);
  EXPECT_EQ(parse_expression(print_number(lit)).number.value.to_u64(), 0xA5u);
}

TEST(Print, UnmodifiedAstIsByteIdentical) {
  std::string s =
      "// header\nmodule m #(parameter W = 8) (input [W-1:0] a, output [W-1:0] b);\n"
      "  assign b = a ^ 8'hFF; /* trailing */\nendmodule\n";
  Ast ast = parse_text(s);
  EXPECT_EQ(print(ast).content, s);
}

TEST(Print, SyntheticNodesPrintCanonically) {
  Ast ast = parse_text("module m(input a, input b, output y); assign y = a; endmodule");
  ModuleDecl& m = ast.modules[0];
  auto* ca = m.items[0].as<ContAssign>();
  ca->assigns[0].second =
      Expr::binary("&", Expr::binary("|", Expr::ident("a"), Expr::ident("b")), Expr::ident("b"));
  m.items[0].span = Span{};
  m.span = Span{};
  std::string out = print(ast).content;
  EXPECT_NE(out.find("assign y = (a | b) & b;"), std::string::npos) << out;
  Ast re = parse_text(out);
  EXPECT_EQ(re.modules[0].ports.size(), 3u);
}

TEST(Print, RoundTripStructuralIdentity) {
  std::string s =
      "module fsm(input clk, input rst, input go, output reg done);\n"
      "  localparam IDLE = 2'b00, RUN = 2'b01, STOP = 2'b10;\n"
      "  reg [1:0] state, next;\n"
      "  always @(posedge clk or posedge rst)\n"
      "    if (rst) state <= IDLE; else state <= next;\n"
      "  always @* begin\n    next = state;\n    done = 1'b0;\n"
      "    case (state)\n      IDLE: if (go) next = RUN;\n      RUN: next = STOP;\n"
      "      STOP: begin next = IDLE; done = 1'b1; end\n      default: next = IDLE;\n"
      "    endcase\n  end\nendmodule\n";
  Ast a = parse_text(s);
  Ast b = parse_text(print(a).content);
  EXPECT_TRUE(structurally_equal(a, b));
  // Canonical printing of the whole tree also round-trips.
  std::string canon;
  for (const auto& m : a.modules) canon += print_module(m, nullptr) + "\n";
  Ast c = parse_text(canon);
  EXPECT_TRUE(structurally_equal(a, c)) << canon;
}

TEST(Resolve, RegWithOneUse) {
  Ast ast = parse_text("module m(input a); reg r; always @* r = a; endmodule");
  SymbolTable t = resolve(ast);
  const Symbol* r = t.modules[0].find("r");
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->kind, SymbolKind::Net);
  EXPECT_EQ(r->net_kind, NetKind::Reg);
  EXPECT_TRUE(r->decl.valid());
  EXPECT_EQ(r->uses.size(), 1u);
  EXPECT_EQ(r->drivers.size(), 1u);
  EXPECT_TRUE(t.modules[0].diagnostics.empty());
}

TEST(Resolve, ShadowingInNamedBlockIsFlagged) {
  Ast ast = parse_text(
      "module m(input clk, output reg [3:0] q); reg [3:0] t;\n"
      "always @(posedge clk) begin : blk reg [3:0] t; t = q; q <= t + 4'd1; end\nendmodule");
  SymbolTable t = resolve(ast);
  const auto& d = t.modules[0].diagnostics;
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, Diagnostic::Kind::Shadowed);
  EXPECT_EQ(d[0].name, "t");
  // Uses inside the block bind to the local declaration.
  EXPECT_EQ(t.modules[0].find("t")->uses.size(), 0u);
}

TEST(Resolve, UndrivenPortAndUnresolvedName) {
  Ast ast = parse_text("module m(input a, output y, output z); assign z = y & b; endmodule");
  SymbolTable t = resolve(ast);
  const Symbol* y = t.modules[0].find("y");
  EXPECT_EQ(y->drivers.size(), 0u);
  EXPECT_EQ(y->uses.size(), 1u);
  ASSERT_EQ(t.modules[0].diagnostics.size(), 1u);
  EXPECT_EQ(t.modules[0].diagnostics[0].kind, Diagnostic::Kind::Unresolved);
  EXPECT_EQ(t.modules[0].diagnostics[0].name, "b");
}

TEST(Resolve, WidthsFromParameters) {
  Ast ast = parse_text(
      "module m #(parameter W = 8) (input [W-1:0] a, output [0:W] b); integer i;\n"
      "localparam H = W * 2; wire [H-1:0] w; endmodule");
  SymbolTable t = resolve(ast);
  const auto& s = t.modules[0];
  EXPECT_EQ(s.find("a")->width, 8);
  EXPECT_EQ(s.find("b")->width, 9);
  EXPECT_EQ(*s.find("b")->left, 0);
  EXPECT_EQ(s.find("i")->width, 32);
  EXPECT_EQ(s.find("w")->width, 16);
}

TEST(ConstEval, SizingRules) {
  ParamEnv env;
  auto v = [&](const std::string& s) { return *const_eval(parse_expression(s), env); };
  EXPECT_EQ(v("4'hF + 4'h1").to_u64(), 0u);
  EXPECT_EQ(v("4'hF + 5'h1").to_u64(), 16u);
  EXPECT_EQ(v("{4'hA, 4'h5}").to_u64(), 0xA5u);
  EXPECT_EQ(v("{2{2'b10}}").to_u64(), 0xAu);
  EXPECT_EQ(v("-4'sd3 >>> 1").to_u64(), 0xEu);
  EXPECT_EQ(v("3'd5 == 3'd5").to_u64(), 1u);
  EXPECT_EQ(v("2 ** 10").to_u64(), 1024u);
  EXPECT_TRUE(v("4'bx1 & 4'b0011").is_x(1));
  EXPECT_FALSE(v("4'bx1 & 4'b0011").is_x(2));
  EXPECT_EQ(*const_int(parse_expression("-3"), env), -3);
}
