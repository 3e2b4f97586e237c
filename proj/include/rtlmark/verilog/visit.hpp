// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rtlmark/verilog/ast.hpp"

namespace rtlmark::vlog {

/// Pre-order walk over an expression tree.
template <typename F>
void visit_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& o : e.operands) visit_expr(o, f);
}

template <typename F>
void visit_expr_mut(Expr& e, F&& f) {
  f(e);
  for (auto& o : e.operands) visit_expr_mut(o, f);
}

/// Pre-order walk over a statement tree (including case item bodies).
template <typename F>
void visit_stmt(const Stmt& s, F&& f) {
  f(s);
  for (const auto& c : s.stmts) visit_stmt(c, f);
  if (s.then_stmt) visit_stmt(*s.then_stmt, f);
  if (s.else_stmt) visit_stmt(*s.else_stmt, f);
  for (const auto& ci : s.items) visit_stmt(*ci.body, f);
}

/// Every expression directly held by a statement node (not recursing into
/// sub-statements). Lhs of an assignment is reported with is_lhs = true.
template <typename F>
void stmt_exprs(const Stmt& s, F&& f) {
  switch (s.kind) {
    case StmtKind::Assign:
      f(s.cond, true);
      f(s.rhs, false);
      break;
    case StmtKind::If:
      f(s.cond, false);
      break;
    case StmtKind::Case:
      f(s.cond, false);
      for (const auto& ci : s.items)
        for (const auto& l : ci.labels) f(l, false);
      break;
    default:
      break;
  }
}

/// Identifiers written by an lvalue (whole names, select bases, concat members).
template <typename F>
void lhs_targets(const Expr& lhs, F&& f) {
  switch (lhs.kind) {
    case ExprKind::Identifier:
      f(lhs);
      break;
    case ExprKind::Index:
    case ExprKind::PartSelect:
    case ExprKind::IndexedPartSelect:
      lhs_targets(lhs.operands[0], f);
      break;
    case ExprKind::Concat:
    case ExprKind::Paren:
      for (const auto& o : lhs.operands) lhs_targets(o, f);
      break;
    default:
      break;
  }
}

}  // namespace rtlmark::vlog
