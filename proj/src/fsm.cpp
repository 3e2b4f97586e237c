// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/fsm.hpp"

#include <algorithm>

#include "rtlmark/verilog/visit.hpp"

namespace rtlmark {

using namespace vlog;

bool StateMachine::is_one_hot() const {
  if (static_cast<int>(states.size()) != width) return false;
  std::set<int> bits;
  for (const auto& s : states) {
    const BitVec& v = values.at(s);
    int ones = 0, pos = -1;
    for (int i = 0; i < v.width(); ++i)
      if (v.bit(i)) ++ones, pos = i;
    if (ones != 1 || v.has_unknown()) return false;
    bits.insert(pos);
  }
  return static_cast<int>(bits.size()) == width;
}

namespace {

struct Analysis {
  const Ast& ast;
  const ModuleDecl& m;
  const ModuleSymbols& syms;
  std::set<std::string> V;
  std::set<std::string> P;
  std::set<std::string> assigned;
  bool ok = true;

  bool is_v(const Expr& e) const { return e.unparen().is_ident() && V.count(e.unparen().text); }
  bool is_p(const Expr& e) const { return e.unparen().is_ident() && P.count(e.unparen().text); }
  bool is_state_ident(const Expr& e) const { return is_v(e) || is_p(e); }

  // Rejects any state identifier outside an (in)equality between state identifiers.
  void generic(const Expr& e) {
    if (e.kind == ExprKind::Binary &&
        (e.text == "==" || e.text == "!=" || e.text == "===" || e.text == "!==") &&
        is_state_ident(e.operands[0]) && is_state_ident(e.operands[1])) {
      if (!is_v(e.operands[0]) && !is_v(e.operands[1])) ok = false;
      return;
    }
    if (e.is_ident() && (V.count(e.text) || P.count(e.text))) {
      ok = false;
      return;
    }
    for (const auto& o : e.operands) generic(o);
  }

  // Right-hand side of an assignment to a state register.
  void state_expr(const Expr& e) {
    const Expr& u = e.unparen();
    if (is_p(u)) {
      assigned.insert(u.text);
      return;
    }
    if (is_v(u)) return;
    if (u.kind == ExprKind::Ternary) {
      generic(u.operands[0]);
      state_expr(u.operands[1]);
      state_expr(u.operands[2]);
      return;
    }
    ok = false;
  }

  void assignment(const Expr& lhs, const Expr& rhs) {
    if (lhs.is_ident() && V.count(lhs.text)) {
      state_expr(rhs);
      return;
    }
    generic(lhs);
    generic(rhs);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
        assignment(s.cond, s.rhs);
        break;
      case StmtKind::If:
        generic(s.cond);
        break;
      case StmtKind::Case:
        if (is_v(s.cond)) {
          if (s.case_keyword != "case") ok = false;
          for (const auto& ci : s.items)
            for (const auto& l : ci.labels)
              if (!is_p(l)) ok = false;
        } else {
          generic(s.cond);
          for (const auto& ci : s.items)
            for (const auto& l : ci.labels) generic(l);
        }
        break;
      default:
        break;
    }
    for (const auto& d : s.decls)
      if (d.range) {
        generic(d.range->msb);
        generic(d.range->lsb);
      }
    for (const auto& c : s.stmts) stmt(c);
    if (s.then_stmt) stmt(*s.then_stmt);
    if (s.else_stmt) stmt(*s.else_stmt);
    for (const auto& ci : s.items) stmt(*ci.body);
  }

  void run() {
    for (const auto& d : m.header_params)
      for (const auto& p : d.params) generic(p.value);
    for (const auto& p : m.ports)
      if (p.range) {
        generic(p.range->msb);
        generic(p.range->lsb);
      }
    for (const auto& it : m.items) {
      if (auto* n = it.as<NetDecl>()) {
        if (n->range) {
          generic(n->range->msb);
          generic(n->range->lsb);
        }
        for (const auto& d : n->names)
          if (d.init) generic(*d.init);
      } else if (auto* pd = it.as<ParamDecl>()) {
        for (const auto& p : pd->params) generic(p.value);
      } else if (auto* ca = it.as<ContAssign>()) {
        for (const auto& [l, r] : ca->assigns) assignment(l, r);
      } else if (auto* al = it.as<Always>()) {
        for (const auto& ev : al->control.events)
          if (ev.edge != Edge::Level || !is_v(ev.signal)) generic(ev.signal);
        stmt(al->body);
      } else if (auto* in = it.as<Instance>()) {
        for (const auto& c : in->params)
          if (c.expr) generic(*c.expr);
        for (const auto& c : in->ports)
          if (c.expr) generic(*c.expr);
      }
    }
  }
};

// Body parameters with a plain sized literal value, by name.
std::map<std::string, const NumberLiteral*> literal_params(const ModuleDecl& m) {
  std::map<std::string, const NumberLiteral*> out;
  for (const auto& it : m.items) {
    auto* pd = it.as<ParamDecl>();
    if (!pd || pd->range || pd->is_signed) continue;
    for (const auto& p : pd->params) {
      const Expr& v = p.value;
      if (v.kind == ExprKind::Number && v.number.width && v.number.based &&
          !v.number.has_unknown())
        out[p.name] = &v.number;
    }
  }
  return out;
}

void collect_cases(const Stmt& s, std::vector<const Stmt*>& out) {
  visit_stmt(s, [&](const Stmt& x) {
    if (x.kind == StmtKind::Case) out.push_back(&x);
  });
}

bool overridden_anywhere(const Ast& ast, const std::string& module) {
  for (const auto& mm : ast.modules)
    for (const auto& it : mm.items)
      if (auto* in = it.as<Instance>())
        if (in->module_name == module && !in->params.empty()) return true;
  return false;
}

}  // namespace

std::vector<StateMachine> find_state_machines(const Ast& ast, const ModuleDecl& m,
                                              const ModuleSymbols& syms) {
  std::vector<StateMachine> out;
  auto lits = literal_params(m);
  bool overridable_ok = !overridden_anywhere(ast, m.name);

  std::vector<const Stmt*> cases;
  for (const auto& it : m.items)
    if (auto* al = it.as<Always>()) collect_cases(al->body, cases);

  auto is_state_reg = [&](const std::string& n) {
    const Symbol* s = syms.find(n);
    return s && s->kind == SymbolKind::Net && s->net_kind == NetKind::Reg;
  };

  // Plain identifier-to-identifier assignments.
  std::vector<std::pair<std::string, std::string>> copies;
  auto note_copy = [&](const Expr& l, const Expr& r) {
    if (l.is_ident() && r.unparen().is_ident()) copies.emplace_back(l.text, r.unparen().text);
  };
  for (const auto& it : m.items) {
    if (auto* ca = it.as<ContAssign>())
      for (const auto& [l, r] : ca->assigns) note_copy(l, r);
    if (auto* al = it.as<Always>())
      visit_stmt(al->body, [&](const Stmt& s) {
        if (s.kind == StmtKind::Assign) note_copy(s.cond, s.rhs);
      });
  }

  std::set<std::string> claimed;
  for (const Stmt* c : cases) {
    if (c->case_keyword != "case" || !c->cond.unparen().is_ident()) continue;
    std::string subject = c->cond.unparen().text;
    if (claimed.count(subject) || !is_state_reg(subject)) continue;
    bool labels_ok = true;
    size_t nlabels = 0;
    for (const auto& ci : c->items)
      for (const auto& l : ci.labels) {
        ++nlabels;
        if (!l.unparen().is_ident() || !lits.count(l.unparen().text)) labels_ok = false;
      }
    if (!labels_ok || nlabels < 2) continue;

    Analysis a{ast, m, syms, {subject}, {}, {}, true};
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& [l, r] : copies) {
        if (lits.count(l) || lits.count(r)) continue;
        if (a.V.count(l) && !a.V.count(r)) grew = a.V.insert(r).second || grew;
        if (a.V.count(r) && !a.V.count(l)) grew = a.V.insert(l).second || grew;
      }
    }
    for (const auto& v : a.V) claimed.insert(v);

    // State constants: labels of state cases, right-hand sides of state
    // assignments and operands of state comparisons.
    auto add_p = [&](const Expr& e) {
      const Expr& u = e.unparen();
      if (u.is_ident() && lits.count(u.text)) a.P.insert(u.text);
    };
    std::function<void(const Expr&)> add_rhs = [&](const Expr& e) {
      const Expr& u = e.unparen();
      add_p(u);
      if (u.kind == ExprKind::Ternary) {
        add_rhs(u.operands[1]);
        add_rhs(u.operands[2]);
      }
    };
    auto scan_expr = [&](const Expr& e) {
      visit_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Binary &&
            (x.text == "==" || x.text == "!=" || x.text == "===" || x.text == "!==")) {
          if (a.is_v(x.operands[0])) add_p(x.operands[1]);
          if (a.is_v(x.operands[1])) add_p(x.operands[0]);
        }
      });
    };
    auto scan_stmt = [&](const Stmt& s) {
      if (s.kind == StmtKind::Case && a.is_v(s.cond))
        for (const auto& ci : s.items)
          for (const auto& l : ci.labels) add_p(l);
      if (s.kind == StmtKind::Assign && s.cond.is_ident() && a.V.count(s.cond.text))
        add_rhs(s.rhs);
      stmt_exprs(s, [&](const Expr& e, bool) { scan_expr(e); });
    };
    for (const auto& it : m.items) {
      if (auto* al = it.as<Always>()) visit_stmt(al->body, scan_stmt);
      if (auto* ca = it.as<ContAssign>())
        for (const auto& [l, r] : ca->assigns) {
          if (l.is_ident() && a.V.count(l.text)) add_rhs(r);
          scan_expr(r);
        }
    }
    a.run();
    if (!a.ok || a.P.size() < 2) continue;

    StateMachine sm;
    // Declarations: each state register alone in a plain reg declaration.
    int width = -1;
    bool decl_ok = true;
    for (const auto& v : a.V) {
      const Symbol* s = syms.find(v);
      if (!s || s->kind != SymbolKind::Net || s->net_kind != NetKind::Reg || s->is_signed) {
        decl_ok = false;
        break;
      }
      if (width < 0) width = s->width;
      if (s->width != width) decl_ok = false;
      bool found = false;
      for (const auto& it : m.items) {
        auto* n = it.as<NetDecl>();
        if (!n) continue;
        for (const auto& d : n->names)
          if (d.name == v) {
            found = true;
            if (n->names.size() != 1 || d.init) decl_ok = false;
            if (n->range) {
              auto msb = const_int(n->range->msb, syms.params);
              auto lsb = const_int(n->range->lsb, syms.params);
              if (!msb || !lsb || *lsb != 0 || *msb != width - 1 ||
                  n->range->msb.kind != ExprKind::Number || n->range->lsb.kind != ExprKind::Number)
                decl_ok = false;
            }
          }
      }
      if (!found) decl_ok = false;
    }
    if (!decl_ok || width < 1) continue;

    std::set<uint64_t> seen_values;
    bool values_ok = true;
    for (const auto& it : m.items) {
      auto* pd = it.as<ParamDecl>();
      if (!pd) continue;
      for (const auto& p : pd->params) {
        if (!a.P.count(p.name)) continue;
        if (!pd->local && !overridable_ok) values_ok = false;
        const NumberLiteral* lit = lits.at(p.name);
        if (*lit->width != width || width > 64) values_ok = false;
        if (!seen_values.insert(lit->value.to_u64()).second) values_ok = false;
        sm.states.push_back(p.name);
        sm.values[p.name] = lit->value;
      }
    }
    if (!values_ok) continue;

    // The case subject first, remaining registers in declaration order.
    sm.vars.push_back(subject);
    for (const auto& s : syms.symbols)
      if (a.V.count(s.name) && s.name != subject && s.scope.empty()) sm.vars.push_back(s.name);
    sm.assigned = a.assigned;
    sm.width = width;
    for (const Stmt* cs : cases)
      if (a.is_v(cs->cond)) sm.cases.push_back(cs);
    out.push_back(std::move(sm));
  }
  return out;
}

}  // namespace rtlmark
