// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/parser.hpp"

#include <unordered_map>
#include <unordered_set>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/lexer.hpp"

namespace rtlmark::vlog {

namespace {

const std::unordered_set<std::string_view> kRejected = {
    "generate", "endgenerate", "genvar", "function", "endfunction", "task", "endtask",
    "initial", "for", "while", "repeat", "forever", "fork", "join", "interface",
    "endinterface", "always_ff", "always_comb", "always_latch", "logic", "typedef", "specify",
    "primitive", "defparam", "force", "release", "assign_deassign", "wait", "disable",
    "tri", "supply0", "supply1", "real", "time", "realtime", "event"};

int binary_precedence(std::string_view op) {
  static const std::unordered_map<std::string_view, int> prec = {
      {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},   {"~^", 4},  {"^~", 4}, {"&", 5},
      {"==", 6}, {"!=", 6}, {"===", 6}, {"!==", 6}, {"<", 7},  {"<=", 7}, {">", 7},
      {">=", 7}, {"<<", 8}, {">>", 8}, {"<<<", 8}, {">>>", 8}, {"+", 9}, {"-", 9},
      {"*", 10}, {"/", 10}, {"%", 10}, {"**", 11}};
  auto it = prec.find(op);
  return it == prec.end() ? 0 : it->second;
}

bool is_unary_op(std::string_view op) {
  return op == "+" || op == "-" || op == "!" || op == "~" || op == "&" || op == "~&" ||
         op == "|" || op == "~|" || op == "^" || op == "~^" || op == "^~";
}

class Parser {
 public:
  Parser(const std::string& src, std::string origin)
      : src_(src), origin_(std::move(origin)), toks_(lex(src, origin_)) {}

  const std::vector<Token>& tokens() const { return toks_; }

  std::vector<ModuleDecl> parse_source() {
    std::vector<ModuleDecl> mods;
    while (!at_end()) {
      if (peek().kind == TokenKind::Directive)
        fail("compiler directives are not supported (no preprocessing)");
      if (!is("module")) expected({"module"});
      mods.push_back(parse_module());
    }
    return mods;
  }

  Expr parse_lone_expression() {
    Expr e = parse_expr();
    if (!at_end()) expected({"end of expression"});
    return e;
  }

  Stmt parse_lone_statement() {
    Stmt s = parse_stmt();
    if (!at_end()) expected({"end of statement"});
    return s;
  }

 private:
  const std::string& src_;
  std::string origin_;
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  std::string_view text(const Token& t) const {
    return std::string_view(src_).substr(t.span.begin, t.span.size());
  }
  std::string_view peek_text(size_t ahead = 0) const { return text(peek(ahead)); }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool is(std::string_view s, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind != TokenKind::End && t.kind != TokenKind::String && text(t) == s;
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  size_t last_end() const { return pos_ == 0 ? 0 : toks_[pos_ - 1].span.end; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> exp = {}) const {
    const Token& t = peek();
    throw ParseError(origin_, SourcePos{t.span.begin, t.line, t.col}, msg, std::move(exp));
  }
  [[noreturn]] void expected(std::vector<std::string> exp) const {
    std::string msg = "expected ";
    for (size_t i = 0; i < exp.size(); ++i) {
      if (i) msg += i + 1 == exp.size() ? " or " : ", ";
      msg += "'" + exp[i] + "'";
    }
    const Token& t = peek();
    msg += t.kind == TokenKind::End ? " before end of input"
                                    : ", found '" + std::string(text(t)) + "'";
    fail(msg, std::move(exp));
  }
  const Token& expect(std::string_view s) {
    if (!is(s)) expected({std::string(s)});
    return next();
  }
  bool accept(std::string_view s) {
    if (is(s)) {
      next();
      return true;
    }
    return false;
  }

  std::string expect_identifier(const char* what) {
    const Token& t = peek();
    if (t.kind == TokenKind::EscapedIdentifier)
      fail("escaped identifiers are not supported in RTL input");
    if (t.kind != TokenKind::Identifier || is_keyword(text(t))) expected({what});
    next();
    return std::string(text(t));
  }

  void check_supported() const {
    const Token& t = peek();
    if (t.kind == TokenKind::Directive)
      fail("compiler directives are not supported (no preprocessing)");
    if (t.kind == TokenKind::SystemName)
      fail("system tasks and functions are not supported");
    if (t.kind == TokenKind::Identifier && kRejected.count(text(t)))
      fail("unsupported construct '" + std::string(text(t)) + "'");
  }

  std::vector<Comment> leading_comments() const { return comments_in(src_, peek().trivia); }

  // ---------------------------------------------------------------- modules

  ModuleDecl parse_module() {
    ModuleDecl m;
    size_t begin = peek().span.begin;
    expect("module");
    m.name_span = peek().span;
    m.name = expect_identifier("module name");
    if (is("#")) {
      size_t hb = peek().span.begin;
      next();
      expect("(");
      if (!is(")")) {
        while (true) {
          if (!is("parameter")) expected({"parameter"});
          m.header_params.push_back(parse_param_decl(/*header=*/true));
          if (!accept(",")) break;
        }
      }
      expect(")");
      m.header_params_span = Span{hb, last_end()};
    }
    if (is("(")) {
      size_t pb = peek().span.begin;
      next();
      if (!is(")")) parse_ansi_ports(m);
      expect(")");
      m.port_list_span = Span{pb, last_end()};
    }
    expect(";");
    while (!is("endmodule")) {
      if (at_end()) expected({"endmodule"});
      m.items.push_back(parse_item());
    }
    m.endmodule_offset = peek().span.begin;
    next();
    m.span = Span{begin, last_end()};
    return m;
  }

  void parse_ansi_ports(ModuleDecl& m) {
    std::optional<Port> proto;
    while (true) {
      Port p;
      p.comments = leading_comments();
      size_t begin = peek().span.begin;
      if (is("input") || is("output") || is("inout")) {
        std::string_view d = text(next());
        p.dir = d == "input" ? Direction::Input : d == "output" ? Direction::Output : Direction::Inout;
        p.kind = NetKind::Wire;
        if (is("wire") || is("reg")) {
          p.kind = text(next()) == "reg" ? NetKind::Reg : NetKind::Wire;
          p.explicit_kind = true;
        } else if (is("integer")) {
          next();
          p.kind = NetKind::Integer;
          p.explicit_kind = true;
        }
        if (accept("signed")) p.is_signed = true;
        if (is("[")) p.range = parse_range();
      } else {
        if (!proto) fail("non-ANSI port lists are not supported", {"input", "output", "inout"});
        p.dir = proto->dir;
        p.kind = proto->kind;
        p.explicit_kind = proto->explicit_kind;
        p.is_signed = proto->is_signed;
        p.range = proto->range;
        p.continuation = true;
      }
      check_supported();
      p.name_span = peek().span;
      p.name = expect_identifier("port name");
      if (is("[")) fail("unpacked array ports are not supported");
      if (is("=")) fail("port initializers are not supported");
      p.span = Span{begin, last_end()};
      for (const auto& other : m.ports)
        if (other.name == p.name) fail("duplicate port '" + p.name + "'");
      proto = p;
      m.ports.push_back(std::move(p));
      if (!accept(",")) break;
    }
  }

  Range parse_range() {
    Range r;
    size_t b = peek().span.begin;
    expect("[");
    r.msb = parse_expr();
    expect(":");
    r.lsb = parse_expr();
    expect("]");
    r.span = Span{b, last_end()};
    return r;
  }

  ParamDecl parse_param_decl(bool header) {
    ParamDecl d;
    size_t begin = peek().span.begin;
    std::string_view kw = text(next());
    d.local = kw == "localparam";
    if (is("integer")) next();
    if (accept("signed")) d.is_signed = true;
    if (is("[")) d.range = parse_range();
    while (true) {
      ParamAssign pa;
      pa.name_span = peek().span;
      pa.name = expect_identifier("parameter name");
      expect("=");
      pa.value = parse_expr();
      d.params.push_back(std::move(pa));
      // In a header list a following "parameter" keyword starts a new decl.
      if (!is(",")) break;
      if (header && is("parameter", 1)) break;
      next();
    }
    d.span = Span{begin, last_end()};
    return d;
  }

  NetDecl parse_net_decl(bool allow_init) {
    NetDecl d;
    size_t begin = peek().span.begin;
    std::string_view kw = text(next());
    d.kind = kw == "reg" ? NetKind::Reg : kw == "integer" ? NetKind::Integer : NetKind::Wire;
    if (accept("signed")) d.is_signed = true;
    if (d.kind == NetKind::Integer) d.is_signed = true;
    if (d.kind != NetKind::Integer && is("[")) d.range = parse_range();
    while (true) {
      Declarator dc;
      check_supported();
      dc.name_span = peek().span;
      dc.name = expect_identifier("identifier");
      if (is("[")) fail("memories (unpacked arrays) are not supported");
      if (accept("=")) {
        if (!allow_init) fail("initializer not allowed here");
        dc.init = parse_expr();
      }
      d.names.push_back(std::move(dc));
      if (!accept(",")) break;
    }
    expect(";");
    d.span = Span{begin, last_end()};
    return d;
  }

  Item parse_item() {
    check_supported();
    Item it;
    it.comments = leading_comments();
    size_t begin = peek().span.begin;
    if (is("wire") || is("reg") || is("integer")) {
      it.node = parse_net_decl(true);
    } else if (is("parameter") || is("localparam")) {
      ParamDecl d = parse_param_decl(false);
      expect(";");
      d.span = Span{d.span.begin, last_end()};
      it.node = std::move(d);
    } else if (is("assign")) {
      next();
      ContAssign ca;
      if (is("#")) fail("delays are not supported");
      while (true) {
        Expr lhs = parse_lvalue();
        expect("=");
        Expr rhs = parse_expr();
        ca.assigns.emplace_back(std::move(lhs), std::move(rhs));
        if (!accept(",")) break;
      }
      expect(";");
      it.node = std::move(ca);
    } else if (is("always")) {
      next();
      Always a;
      a.control = parse_event_control();
      a.body = parse_stmt();
      it.node = std::move(a);
    } else if (is("input") || is("output") || is("inout")) {
      fail("non-ANSI port declarations are not supported");
    } else if (peek().kind == TokenKind::Identifier && !is_keyword(peek_text())) {
      it.node = parse_instance();
    } else {
      expected({"wire", "reg", "integer", "parameter", "localparam", "assign", "always",
                "module instance"});
    }
    it.span = Span{begin, last_end()};
    return it;
  }

  std::vector<Connection> parse_connections() {
    std::vector<Connection> out;
    expect("(");
    if (is(")")) {
      next();
      return out;
    }
    while (true) {
      Connection c;
      size_t b = peek().span.begin;
      if (accept(".")) {
        c.named = true;
        c.port = expect_identifier("port name");
        expect("(");
        if (!is(")")) c.expr = parse_expr();
        expect(")");
      } else {
        c.expr = parse_expr();
      }
      c.span = Span{b, last_end()};
      out.push_back(std::move(c));
      if (!accept(",")) break;
    }
    expect(")");
    return out;
  }

  Instance parse_instance() {
    Instance inst;
    inst.module_span = peek().span;
    inst.module_name = expect_identifier("module name");
    if (accept("#")) inst.params = parse_connections();
    inst.name_span = peek().span;
    inst.name = expect_identifier("instance name");
    if (is("[")) fail("instance arrays are not supported");
    inst.ports = parse_connections();
    if (is(",")) fail("multiple instances per statement are not supported");
    expect(";");
    return inst;
  }

  EventControl parse_event_control() {
    EventControl ec;
    size_t begin = peek().span.begin;
    expect("@");
    if (accept("*")) {
      ec.star = true;
      ec.span = Span{begin, last_end()};
      return ec;
    }
    expect("(");
    if (is("*") && is(")", 1)) {
      next();
      next();
      ec.star = true;
      ec.span = Span{begin, last_end()};
      return ec;
    }
    while (true) {
      EventExpr ev;
      size_t eb = peek().span.begin;
      if (accept("posedge"))
        ev.edge = Edge::Posedge;
      else if (accept("negedge"))
        ev.edge = Edge::Negedge;
      ev.signal = parse_primary();
      ev.span = Span{eb, last_end()};
      ec.events.push_back(std::move(ev));
      if (is("or") || is(",")) {
        ec.separators.emplace_back(peek_text());
        ec.separator_spans.push_back(peek().span);
        next();
        continue;
      }
      break;
    }
    expect(")");
    ec.span = Span{begin, last_end()};
    return ec;
  }

  // ------------------------------------------------------------- statements

  Stmt parse_stmt() {
    check_supported();
    Stmt s;
    s.comments = leading_comments();
    size_t begin = peek().span.begin;
    if (accept("begin")) {
      s.kind = StmtKind::Block;
      if (accept(":")) s.label = expect_identifier("block label");
      while (is("reg") || is("integer")) {
        if (s.label.empty()) fail("declarations require a named block");
        s.decls.push_back(parse_net_decl(false));
      }
      while (!is("end")) {
        if (at_end()) expected({"end"});
        s.stmts.push_back(parse_stmt());
      }
      next();
      if (is(":")) fail("end labels are not supported");
    } else if (accept("if")) {
      s.kind = StmtKind::If;
      expect("(");
      s.cond = parse_expr();
      expect(")");
      s.then_stmt = parse_stmt();
      if (accept("else")) s.else_stmt = parse_stmt();
    } else if (is("case") || is("casez") || is("casex")) {
      s.kind = StmtKind::Case;
      s.case_keyword = std::string(text(next()));
      expect("(");
      s.cond = parse_expr();
      expect(")");
      while (!is("endcase")) {
        if (at_end()) expected({"endcase"});
        CaseItem ci;
        size_t cb = peek().span.begin;
        if (accept("default")) {
          ci.is_default = true;
          accept(":");
        } else {
          while (true) {
            ci.labels.push_back(parse_expr());
            if (!accept(",")) break;
          }
          expect(":");
        }
        ci.body = parse_stmt();
        ci.span = Span{cb, last_end()};
        s.items.push_back(std::move(ci));
      }
      next();
    } else if (accept(";")) {
      s.kind = StmtKind::Null;
    } else if (is("#") || is("@")) {
      fail("timing controls inside statements are not supported");
    } else {
      s.kind = StmtKind::Assign;
      s.cond = parse_lvalue();
      if (accept("<="))
        s.nonblocking = true;
      else if (!accept("="))
        expected({"=", "<="});
      if (is("#")) fail("intra-assignment delays are not supported");
      s.rhs = parse_expr();
      expect(";");
    }
    s.span = Span{begin, last_end()};
    return s;
  }

  Expr parse_lvalue() {
    if (is("{")) return parse_primary();
    check_supported();
    const Token& t = peek();
    if (t.kind != TokenKind::Identifier || is_keyword(text(t))) expected({"identifier"});
    return parse_primary();
  }

  // ------------------------------------------------------------ expressions

  Expr parse_expr() {
    size_t begin = peek().span.begin;
    Expr cond = parse_binary(1);
    if (!is("?")) return cond;
    next();
    Expr t = parse_expr();
    expect(":");
    Expr f = parse_expr();
    Expr e = Expr::ternary(std::move(cond), std::move(t), std::move(f));
    e.span = Span{begin, last_end()};
    return e;
  }

  Expr parse_binary(int min_prec) {
    size_t begin = peek().span.begin;
    Expr lhs = parse_unary();
    while (true) {
      const Token& t = peek();
      if (t.kind != TokenKind::Operator) break;
      std::string_view op = text(t);
      int prec = binary_precedence(op);
      if (prec == 0 || prec < min_prec) break;
      next();
      // ** is right associative; everything else is left associative.
      Expr rhs = parse_binary(op == "**" ? prec : prec + 1);
      lhs = Expr::binary(std::string(op), std::move(lhs), std::move(rhs));
      lhs.span = Span{begin, last_end()};
    }
    return lhs;
  }

  Expr parse_unary() {
    const Token& t = peek();
    if (t.kind == TokenKind::Operator && is_unary_op(text(t))) {
      size_t begin = t.span.begin;
      std::string op(text(t));
      next();
      Expr e = Expr::unary(op, parse_unary());
      e.span = Span{begin, last_end()};
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    check_supported();
    const Token& t = peek();
    size_t begin = t.span.begin;
    if (t.kind == TokenKind::Number) {
      next();
      Expr e = Expr::num(parse_number(text(t)));
      e.span = t.span;
      return e;
    }
    if (t.kind == TokenKind::String) fail("string literals are not supported");
    if (t.kind == TokenKind::EscapedIdentifier)
      fail("escaped identifiers are not supported in RTL input");
    if (t.kind == TokenKind::Identifier && !is_keyword(text(t))) {
      next();
      Expr e = Expr::ident(std::string(text(t)));
      e.span = t.span;
      if (is("(")) fail("function calls are not supported");
      if (is("[")) {
        next();
        Expr first = parse_expr();
        if (accept(":")) {
          Expr lsb = parse_expr();
          expect("]");
          Expr ps;
          ps.kind = ExprKind::PartSelect;
          ps.operands = {std::move(e), std::move(first), std::move(lsb)};
          ps.span = Span{begin, last_end()};
          e = std::move(ps);
        } else if (is("+:") || is("-:")) {
          std::string op(text(next()));
          Expr w = parse_expr();
          expect("]");
          Expr ps;
          ps.kind = ExprKind::IndexedPartSelect;
          ps.text = op;
          ps.operands = {std::move(e), std::move(first), std::move(w)};
          ps.span = Span{begin, last_end()};
          e = std::move(ps);
        } else {
          expect("]");
          Expr ix;
          ix.kind = ExprKind::Index;
          ix.operands = {std::move(e), std::move(first)};
          ix.span = Span{begin, last_end()};
          e = std::move(ix);
        }
        if (is("[")) fail("multi-dimensional selects are not supported");
      }
      return e;
    }
    if (accept("(")) {
      Expr inner = parse_expr();
      expect(")");
      Expr e = Expr::paren(std::move(inner));
      e.span = Span{begin, last_end()};
      return e;
    }
    if (accept("{")) {
      Expr first = parse_expr();
      if (is("{")) {
        size_t cb = peek().span.begin;
        next();
        Expr cat;
        cat.kind = ExprKind::Concat;
        while (true) {
          cat.operands.push_back(parse_expr());
          if (!accept(",")) break;
        }
        expect("}");
        cat.span = Span{cb, last_end()};
        expect("}");
        Expr rep;
        rep.kind = ExprKind::Replicate;
        rep.operands = {std::move(first), std::move(cat)};
        rep.span = Span{begin, last_end()};
        return rep;
      }
      Expr cat;
      cat.kind = ExprKind::Concat;
      cat.operands.push_back(std::move(first));
      while (accept(",")) cat.operands.push_back(parse_expr());
      expect("}");
      cat.span = Span{begin, last_end()};
      return cat;
    }
    expected({"expression"});
  }
};

}  // namespace

Ast parse(const SourceText& source) {
  auto text = std::make_shared<const std::string>(source.content);
  Parser p(*text, source.origin);
  Ast ast;
  ast.modules = p.parse_source();
  ast.source = text;
  ast.origin = source.origin;
  ast.tokens = std::make_shared<const std::vector<Token>>(p.tokens());
  std::unordered_set<std::string> names;
  for (const auto& m : ast.modules) {
    if (!names.insert(m.name).second) {
      auto pos = position_of(*text, m.span.begin);
      throw ParseError(source.origin, pos, "duplicate module '" + m.name + "'");
    }
  }
  return ast;
}

Expr parse_expression(const std::string& text) {
  Parser p(text, "<expr>");
  return p.parse_lone_expression();
}

Stmt parse_statement(const std::string& text) {
  Parser p(text, "<stmt>");
  return p.parse_lone_statement();
}

}  // namespace rtlmark::vlog
