// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/ast.hpp"

namespace rtlmark::vlog {

Base NumberLiteral::base() const {
  switch (base_char) {
    case 'b': case 'B': return Base::Binary;
    case 'o': case 'O': return Base::Octal;
    case 'h': case 'H': return Base::Hexadecimal;
    default: return Base::Decimal;
  }
}

int NumberLiteral::radix() const {
  switch (base()) {
    case Base::Binary: return 2;
    case Base::Octal: return 8;
    case Base::Hexadecimal: return 16;
    case Base::Decimal: return 10;
  }
  return 10;
}

Expr Expr::ident(std::string name) {
  Expr e;
  e.kind = ExprKind::Identifier;
  e.text = std::move(name);
  return e;
}

Expr Expr::num(NumberLiteral lit) {
  Expr e;
  e.kind = ExprKind::Number;
  e.number = std::move(lit);
  return e;
}

Expr Expr::unary(std::string op, Expr x) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.text = std::move(op);
  e.operands.push_back(std::move(x));
  return e;
}

Expr Expr::binary(std::string op, Expr l, Expr r) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.text = std::move(op);
  e.operands.push_back(std::move(l));
  e.operands.push_back(std::move(r));
  return e;
}

Expr Expr::paren(Expr x) {
  Expr e;
  e.kind = ExprKind::Paren;
  e.operands.push_back(std::move(x));
  return e;
}

Expr Expr::ternary(Expr c, Expr t, Expr f) {
  Expr e;
  e.kind = ExprKind::Ternary;
  e.operands.push_back(std::move(c));
  e.operands.push_back(std::move(t));
  e.operands.push_back(std::move(f));
  return e;
}

const Expr& Expr::unparen() const {
  const Expr* e = this;
  while (e->kind == ExprKind::Paren) e = &e->operands[0];
  return *e;
}

Stmt Stmt::assign(Expr lhs, Expr rhs, bool nonblocking) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.cond = std::move(lhs);
  s.rhs = std::move(rhs);
  s.nonblocking = nonblocking;
  return s;
}

Stmt Stmt::block(std::vector<Stmt> stmts) {
  Stmt s;
  s.kind = StmtKind::Block;
  s.stmts = std::move(stmts);
  return s;
}

EventControl::Style EventControl::separator_style() const {
  if (separators.empty()) return Style::None;
  bool any_or = false, any_comma = false;
  for (const auto& s : separators) (s == "or" ? any_or : any_comma) = true;
  if (any_or && any_comma) return Style::Mixed;
  return any_or ? Style::OrKeyword : Style::Comma;
}

bool EventControl::has_edges() const {
  for (const auto& e : events)
    if (e.edge != Edge::Level) return true;
  return false;
}

const Port* ModuleDecl::find_port(const std::string& n) const {
  for (const auto& p : ports)
    if (p.name == n) return &p;
  return nullptr;
}

const ModuleDecl* Ast::find_module(const std::string& n) const {
  for (const auto& m : modules)
    if (m.name == n) return &m;
  return nullptr;
}

std::string_view Ast::text(const Span& s) const {
  if (!source || !s.valid()) return {};
  return std::string_view(*source).substr(s.begin, s.end - s.begin);
}

}  // namespace rtlmark::vlog
