// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "rtlmark/errors.hpp"
#include "rtlmark/fsm.hpp"
#include "rtlmark/verilog/printer.hpp"
#include "rtlmark/verilog/visit.hpp"
#include "rule_impl.hpp"

namespace rtlmark::rules {

using namespace vlog;

namespace {

// Leading whitespace of the line holding `offset`.
std::string line_leading(const std::string& src, size_t offset) {
  size_t start = offset == 0 ? 0 : src.rfind('\n', offset - 1);
  start = start == std::string::npos ? 0 : start + 1;
  size_t end = start;
  while (end < src.size() && (src[end] == ' ' || src[end] == '\t')) ++end;
  return src.substr(start, end - start);
}

bool starts_line(const std::string& src, size_t offset) {
  size_t start = offset == 0 ? 0 : src.rfind('\n', offset - 1);
  start = start == std::string::npos ? 0 : start + 1;
  for (size_t i = start; i < offset; ++i)
    if (src[i] != ' ' && src[i] != '\t') return false;
  return true;
}

// Inserts `line` as the last statement of a begin/end block.
void insert_before_end(const Context& ctx, Rewriter& rw, const Stmt& block, const std::string& line) {
  size_t end_kw = block.span.end - 3;
  std::string inner = block.stmts.empty() ? line_leading(ctx.src, block.span.begin) + "  "
                                          : line_leading(ctx.src, block.stmts.front().span.begin);
  if (starts_line(ctx.src, end_kw)) {
    size_t line_start = end_kw - line_indent(ctx.src, end_kw).size();
    rw.insert(line_start, inner + line + "\n");
  } else {
    rw.insert(end_kw, line + " ");
  }
}

// Rewrites `s` as a begin/end block ending with `line`.
void append_to_stmt(const Context& ctx, Rewriter& rw, const Stmt& s, const std::string& line) {
  if (s.kind == StmtKind::Block) {
    insert_before_end(ctx, rw, s, line);
    return;
  }
  std::string base = line_leading(ctx.src, s.span.begin);
  std::string inner = base + "  ";
  rw.replace(s.span, "begin\n" + inner + ctx.text(s.span) + "\n" + inner + line + "\n" + base + "end");
}

std::string fresh_upper(const Context& ctx, const std::string& stem, const Bytes& bytes) {
  for (size_t n = 2; n <= bytes.size(); ++n) {
    std::string s = keyed_letters(bytes, n);
    std::transform(s.begin(), s.end(), s.begin(), ::toupper);
    if (!name_taken(ctx, stem + s)) return stem + s;
  }
  return {};
}

}  // namespace

// ------------------------------------------------------------------- T8

namespace {

struct T8Layout {
  std::vector<std::string> targets;  // assigned states, declaration order
  size_t target = 0;                 // index into targets
};

T8Layout t8_layout(const Context& ctx, const StateMachine& sm) {
  T8Layout l;
  for (const auto& s : sm.states)
    if (sm.assigned.count(s)) l.targets.push_back(s);
  if (!l.targets.empty())
    l.target = ctx.derive_u64("T8", "target|" + std::to_string(l.targets.size())) % l.targets.size();
  return l;
}

size_t t8_position(const Context& ctx, size_t items) {
  return ctx.derive_u64("T8", "position|" + std::to_string(items)) % (items + 1);
}

// First assignment to a state register inside a case statement's items.
const Stmt* transition_assign(const Stmt& cs, const StateMachine& sm) {
  const Stmt* found = nullptr;
  for (const auto& ci : cs.items)
    visit_stmt(*ci.body, [&](const Stmt& s) {
      if (!found && s.kind == StmtKind::Assign && s.cond.is_ident() &&
          std::find(sm.vars.begin(), sm.vars.end(), s.cond.text) != sm.vars.end())
        found = &s;
    });
  return found;
}

}  // namespace

std::vector<Candidate> candidates_T8(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& sm : find_state_machines(ctx.ast, ctx.mod, ctx.syms)) {
    if (sm.width > 16) continue;
    std::set<uint64_t> used;
    for (const auto& [n, v] : sm.values) used.insert(v.to_u64());
    uint64_t space = uint64_t{1} << sm.width;
    if (used.size() >= space) continue;
    T8Layout layout = t8_layout(ctx, sm);
    if (layout.targets.empty()) continue;
    const Stmt* cs = nullptr;
    const Stmt* assign = nullptr;
    for (const Stmt* c : sm.cases)
      if ((assign = transition_assign(*c, sm))) {
        cs = c;
        break;
      }
    if (!cs) continue;
    std::string name = fresh_upper(ctx, "ST_", ctx.derive("T8", "name"));
    if (name.empty()) continue;

    uint64_t pick = ctx.derive_u64("T8", "value") % (space - used.size());
    uint64_t value = 0;
    for (uint64_t v = 0; v < space; ++v)
      if (!used.count(v) && pick-- == 0) {
        value = v;
        break;
      }

    std::vector<const CaseItem*> plain;
    const CaseItem* dflt = nullptr;
    for (const auto& ci : cs->items) {
      if (ci.is_default)
        dflt = &ci;
      else
        plain.push_back(&ci);
    }
    size_t q = t8_position(ctx, plain.size());
    std::string target = layout.targets[layout.target];

    const Item* last_decl = nullptr;
    for (const auto& it : ctx.mod.items)
      if (auto* pd = it.as<ParamDecl>())
        for (const auto& p : pd->params)
          if (p.name == sm.states.back()) last_decl = &it;

    Candidate c;
    c.category = "fsm";
    c.key = sm.vars[0];
    c.description = "add detour state " + name + " re-entering " + target;
    c.params = {static_cast<uint8_t>(layout.target), static_cast<uint8_t>(q),
                static_cast<uint8_t>(value)};
    std::string line = name + ": " + ctx.text(assign->cond.span) +
                       (assign->nonblocking ? " <= " : " = ") + target + ";";
    std::string decl = "localparam " + name + " = " + std::to_string(sm.width) + "'d" +
                       std::to_string(value) + ";";
    size_t at = q < plain.size() ? plain[q]->span.begin : dflt ? dflt->span.begin : Span::npos;
    size_t endcase = cs->span.end - 7;
    std::string item_indent = line_leading(ctx.src, cs->items.front().span.begin);
    c.edit = [&ctx, last_decl, decl, line, at, endcase, item_indent](Rewriter& rw) {
      rw.insert(last_decl->span.end, "\n" + line_leading(ctx.src, last_decl->span.begin) + decl);
      if (at != Span::npos)
        rw.insert(at, own_line(ctx.src, at, line));
      else if (starts_line(ctx.src, endcase))
        rw.insert(endcase - line_indent(ctx.src, endcase).size(), item_indent + line + "\n");
      else
        rw.insert(endcase, line + " ");
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T8(const Context& ctx) {
  int n = 0;
  for (const auto& sm : find_state_machines(ctx.ast, ctx.mod, ctx.syms)) {
    T8Layout layout = t8_layout(ctx, sm);
    if (layout.targets.empty()) continue;
    for (const Stmt* cs : sm.cases) {
      std::vector<const CaseItem*> plain;
      for (const auto& ci : cs->items)
        if (!ci.is_default) plain.push_back(&ci);
      if (plain.size() < 2) continue;
      size_t q = t8_position(ctx, plain.size() - 1);
      const CaseItem& ci = *plain[q];
      if (ci.labels.size() != 1 || !ci.labels[0].unparen().is_ident()) continue;
      const std::string& label = ci.labels[0].unparen().text;
      if (sm.assigned.count(label)) continue;
      const Stmt& body = *ci.body;
      if (body.kind != StmtKind::Assign || !body.cond.is_ident() ||
          std::find(sm.vars.begin(), sm.vars.end(), body.cond.text) == sm.vars.end())
        continue;
      const Expr& rhs = body.rhs.unparen();
      n += rhs.is_ident() && rhs.text == layout.targets[layout.target];
    }
  }
  return n;
}

// ------------------------------------------------------------------- T9

namespace {

const char* dual_of(const std::string& op) {
  if (op == "&") return "|";
  if (op == "|") return "&";
  if (op == "&&") return "||";
  if (op == "||") return "&&";
  return nullptr;
}

const char* negation_of(const std::string& op) { return op.size() == 2 ? "!" : "~"; }

bool is_negation(const Expr& e, const char* neg) {
  return e.kind == ExprKind::Unary && e.text == neg;
}

// ~(~a | ~b) and !(!a || !b) shapes.
bool is_de_morgan(const Expr& e) {
  if (e.kind != ExprKind::Unary || e.operands[0].kind != ExprKind::Paren) return false;
  const Expr& inner = e.operands[0].unparen();
  if (inner.kind != ExprKind::Binary || !dual_of(inner.text)) return false;
  const char* neg = negation_of(inner.text);
  return e.text == neg && is_negation(inner.operands[0], neg) &&
         is_negation(inner.operands[1], neg);
}

void logic_roots(const ModuleDecl& m, const std::function<void(const Expr&)>& f) {
  for (const auto& it : m.items)
    if (auto* ca = it.as<ContAssign>())
      for (const auto& [l, r] : ca->assigns) f(r);
  for_each_stmt(m, [&](const Stmt& s) {
    if (s.kind == StmtKind::Assign) f(s.rhs);
    if (s.kind == StmtKind::If) f(s.cond);
  });
}

}  // namespace

std::vector<Candidate> candidates_T9(const Context& ctx) {
  std::vector<Candidate> out;
  logic_roots(ctx.mod, [&](const Expr& root) {
    std::set<const Expr*> inside_pattern;
    visit_expr(root, [&](const Expr& e) {
      if (is_de_morgan(e)) inside_pattern.insert(&e.operands[0].unparen());
      if (e.kind != ExprKind::Binary || !dual_of(e.text) || inside_pattern.count(&e)) return;
      const char* neg = negation_of(e.text);
      Candidate c;
      c.category = "expr";
      c.key = print_expr(e);
      c.description = "De Morgan rewrite of '" + c.key + "'";
      std::string text = std::string(neg) + "(" + neg + operand_text(ctx, e.operands[0]) + " " +
                         dual_of(e.text) + " " + neg + operand_text(ctx, e.operands[1]) + ")";
      Span span = e.span;
      c.edit = [span, text](Rewriter& rw) { rw.replace(span, text); };
      out.push_back(std::move(c));
    });
  });
  return out;
}

int signature_T9(const Context& ctx) {
  int n = 0;
  logic_roots(ctx.mod, [&](const Expr& root) {
    visit_expr(root, [&](const Expr& e) { n += is_de_morgan(e); });
  });
  return n;
}

// ------------------------------------------------------------------ T10

std::vector<Candidate> candidates_T10(const Context& ctx) {
  std::vector<Candidate> out;
  const auto& ports = ctx.mod.ports;
  for (const auto& it : ctx.mod.items) {
    auto* ca = it.as<ContAssign>();
    if (!ca || ca->assigns.size() != 1 || !ca->assigns[0].first.is_ident()) continue;
    const auto& [lhs, rhs] = ca->assigns[0];
    const Symbol* s = ctx.syms.find(lhs.text);
    if (!s || !s->scope.empty() || s->drivers.size() != 1) continue;

    std::function<void(Rewriter&)> redeclare;
    if (s->kind == SymbolKind::Net && s->net_kind == NetKind::Wire) {
      const Item* decl = nullptr;
      for (const auto& d : ctx.mod.items)
        if (auto* nd = d.as<NetDecl>())
          for (const auto& dc : nd->names)
            if (dc.name == lhs.text && nd->names.size() == 1 && !dc.init) decl = &d;
      if (!decl) continue;
      Span kw{decl->span.begin, decl->span.begin + 4};
      redeclare = [kw](Rewriter& rw) { rw.replace(kw, "reg"); };
    } else if (s->kind == SymbolKind::Port && s->dir == Direction::Output &&
               s->net_kind == NetKind::Wire) {
      size_t i = 0;
      while (ports[i].name != lhs.text) ++i;
      const Port& p = ports[i];
      if (p.continuation || (i + 1 < ports.size() && ports[i + 1].continuation)) continue;
      std::string head = ctx.text(p.span);
      if (p.explicit_kind) {
        size_t w = head.find("wire");
        Span kw{p.span.begin + w, p.span.begin + w + 4};
        redeclare = [kw](Rewriter& rw) { rw.replace(kw, "reg"); };
      } else {
        size_t at = p.span.begin + 6;  // after "output"
        redeclare = [at](Rewriter& rw) { rw.insert(at, " reg"); };
      }
    } else {
      continue;
    }
    Candidate c;
    c.category = "assign";
    c.key = lhs.text;
    c.description = "continuous assignment to '" + lhs.text + "' as always @*";
    std::string text = "always @* " + ctx.text(lhs.span) + " = " + ctx.text(rhs.span) + ";";
    Span span = it.span;
    c.edit = [span, text, redeclare](Rewriter& rw) {
      rw.replace(span, text);
      redeclare(rw);
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T10(const Context& ctx) {
  int n = 0;
  for (const auto& it : ctx.mod.items)
    if (auto* al = it.as<Always>())
      n += al->control.star && al->body.kind == StmtKind::Assign && !al->body.nonblocking;
  return n;
}

// ------------------------------------------------------------------ T11

std::vector<Candidate> candidates_T11(const Context& ctx) {
  std::vector<Candidate> out;
  std::vector<SignalValue> storage;
  Evaluator ev(width_lookup(ctx.syms, storage));
  for_each_stmt(ctx.mod, [&](const Stmt& s) {
    if (s.kind != StmtKind::If || !s.else_stmt) return;
    const Stmt& a = *s.then_stmt;
    const Stmt& b = *s.else_stmt;
    if (a.kind != StmtKind::Assign || b.kind != StmtKind::Assign) return;
    if (a.nonblocking != b.nonblocking || dump_expr(a.cond) != dump_expr(b.cond)) return;
    // Block-local names are outside the width lookup.
    bool local = false;
    for (const Expr* e : {&a.cond, &a.rhs, &b.rhs, &s.cond})
      visit_expr(*e, [&](const Expr& x) {
        if (x.is_ident() && !symbol_at(ctx.syms, x)) local = true;
      });
    if (local) return;
    int wx = ev.self_width(a.cond), wa = ev.self_width(a.rhs), wb = ev.self_width(b.rhs);
    if (std::max(wx, wa) != std::max(wx, wb)) return;
    if (ev.self_signed(a.rhs) != ev.self_signed(b.rhs)) return;
    auto arm = [&](const Expr& e) {
      std::string t = ctx.text(e.span);
      return e.kind == ExprKind::Ternary ? "(" + t + ")" : t;
    };
    Candidate c;
    c.category = "if";
    c.key = print_expr(a.cond);
    c.description = "if/else assigning '" + c.key + "' as a ternary";
    std::string text = ctx.text(a.cond.span) + (a.nonblocking ? " <= " : " = ") +
                       operand_text(ctx, s.cond) + " ? " + arm(a.rhs) + " : " + arm(b.rhs) + ";";
    Span span = s.span;
    c.edit = [span, text](Rewriter& rw) { rw.replace(span, text); };
    out.push_back(std::move(c));
  });
  return out;
}

int signature_T11(const Context& ctx) {
  int n = 0;
  for_each_stmt(ctx.mod, [&](const Stmt& s) {
    n += s.kind == StmtKind::Assign && s.rhs.kind == ExprKind::Ternary;
  });
  return n;
}

// ------------------------------------------------------------------ T12

namespace {

struct Run {
  std::vector<const Stmt*> stmts;  // current order
  std::vector<size_t> decl;        // declaration index of each lhs
};

std::vector<Run> constant_runs(const Context& ctx) {
  std::vector<Run> runs;
  auto constant = [&](const Stmt& s) -> const Symbol* {
    if (s.kind != StmtKind::Assign || !s.cond.is_ident()) return nullptr;
    const Expr& r = s.rhs.unparen();
    bool ok = r.kind == ExprKind::Number ||
              (r.is_ident() && symbol_at(ctx.syms, r) &&
               symbol_at(ctx.syms, r)->kind == SymbolKind::Parameter);
    return ok ? symbol_at(ctx.syms, s.cond) : nullptr;
  };
  for_each_stmt(ctx.mod, [&](const Stmt& blk) {
    if (blk.kind != StmtKind::Block) return;
    Run cur;
    auto flush = [&] {
      if (cur.stmts.size() >= 2) runs.push_back(cur);
      cur = {};
    };
    for (const auto& s : blk.stmts) {
      const Symbol* sym = constant(s);
      if (!sym) {
        flush();
        continue;
      }
      bool clash = !cur.stmts.empty() &&
                   (cur.stmts.front()->nonblocking != s.nonblocking ||
                    std::find(cur.decl.begin(), cur.decl.end(), sym->order) != cur.decl.end());
      if (clash) flush();
      cur.stmts.push_back(&s);
      cur.decl.push_back(sym->order);
    }
    flush();
  });
  return runs;
}

// Keyed target order of a run, as indices into run.stmts; empty when the
// keyed permutation is the identity (the run carries no signal).
std::vector<size_t> keyed_order(const Context& ctx, const Run& run) {
  size_t k = run.stmts.size();
  std::vector<size_t> by_decl(k);
  std::iota(by_decl.begin(), by_decl.end(), 0);
  std::sort(by_decl.begin(), by_decl.end(),
            [&](size_t a, size_t b) { return run.decl[a] < run.decl[b]; });
  std::vector<size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t i = k; i > 1; --i) {
    uint64_t r = ctx.derive_u64("T12", "n=" + std::to_string(k) + "|" + std::to_string(i - 1));
    std::swap(perm[i - 1], perm[r % i]);
  }
  bool identity = true;
  for (size_t i = 0; i < k; ++i) identity = identity && perm[i] == i;
  if (identity) return {};
  std::vector<size_t> out(k);
  for (size_t i = 0; i < k; ++i) out[i] = by_decl[perm[i]];
  return out;
}

bool in_order(const std::vector<size_t>& order) {
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] != i) return false;
  return true;
}

}  // namespace

std::vector<Candidate> candidates_T12(const Context& ctx) {
  auto runs = constant_runs(ctx);
  size_t pending = 0;
  for (const auto& r : runs) {
    auto o = keyed_order(ctx, r);
    pending += !o.empty() && !in_order(o);
  }
  if (pending == 0) return {};
  Candidate c;
  c.category = "module";
  c.key = ctx.mod.name;
  c.description = "reorder " + std::to_string(pending) + " initialization runs";
  c.edit = [&ctx, runs](Rewriter& rw) {
    for (const auto& r : runs) {
      auto o = keyed_order(ctx, r);
      if (o.empty() || in_order(o)) continue;
      for (size_t i = 0; i < o.size(); ++i)
        rw.replace(r.stmts[i]->span, ctx.text(r.stmts[o[i]]->span));
    }
  };
  return {std::move(c)};
}

int signature_T12(const Context& ctx) {
  int eligible = 0;
  for (const auto& r : constant_runs(ctx)) {
    auto o = keyed_order(ctx, r);
    if (o.empty()) continue;
    if (!in_order(o)) return 0;
    ++eligible;
  }
  return eligible > 0 ? 1 : 0;
}

// ------------------------------------------------------------------ T13

std::string t13_kind_word(NetKind kind) {
  switch (kind) {
    case NetKind::Reg: return "Register";
    case NetKind::Integer: return "Integer";
    default: return "Wire";
  }
}

std::string t13_comment(const Context& ctx, const std::string& kind_word, const std::string& name) {
  std::string tag = to_hex(ctx.derive("T13", name)).substr(0, 4);
  return "//" + kind_word + " signal " + name + " " + tag;
}

namespace {

std::string direction_word(Direction d) {
  switch (d) {
    case Direction::Input: return "Input";
    case Direction::Output: return "Output";
    default: return "Inout";
  }
}

bool has_comment(const std::vector<Comment>& cs, const std::string& text) {
  return std::any_of(cs.begin(), cs.end(), [&](const Comment& c) { return c.text == text; });
}

}  // namespace

std::vector<Candidate> candidates_T13(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& it : ctx.mod.items) {
    auto* nd = it.as<NetDecl>();
    if (!nd || nd->names.size() != 1) continue;
    const std::string& name = nd->names[0].name;
    std::string comment = t13_comment(ctx, t13_kind_word(nd->kind), name);
    if (has_comment(it.comments, comment)) continue;
    Candidate c;
    c.category = "decl";
    c.key = name;
    c.description = "comment '" + comment + "'";
    c.params = ctx.derive("T13", name);
    size_t at = it.span.begin;
    c.edit = [&ctx, at, comment](Rewriter& rw) { rw.insert(at, own_line(ctx.src, at, comment)); };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T13(const Context& ctx) {
  int n = 0;
  for (const auto& p : ctx.mod.ports)
    n += has_comment(p.comments, t13_comment(ctx, direction_word(p.dir), p.name));
  for (const auto& it : ctx.mod.items)
    if (auto* nd = it.as<NetDecl>(); nd && nd->names.size() == 1)
      n += has_comment(it.comments, t13_comment(ctx, t13_kind_word(nd->kind), nd->names[0].name));
  return n;
}

// ------------------------------------------------------------------ T14

namespace {

struct Ordered {
  const Expr* cond;
  bool follows;  // operands already in keyed order
};

std::optional<size_t> first_decl(const Context& ctx, const Expr& e) {
  std::optional<size_t> best;
  visit_expr(e, [&](const Expr& x) {
    if (!x.is_ident()) return;
    if (const Symbol* s = symbol_at(ctx.syms, x)) best = std::min(best.value_or(s->order), s->order);
  });
  return best;
}

std::vector<Ordered> ordered_conditions(const Context& ctx) {
  bool descending = ctx.derive("T14")[0] & 1;
  std::vector<Ordered> out;
  for_each_stmt(ctx.mod, [&](const Stmt& s) {
    if (s.kind != StmtKind::If) return;
    const Expr& c = s.cond.unparen();
    if (c.kind != ExprKind::Binary || (c.text != "&" && c.text != "&&")) return;
    for (const auto& o : c.operands)
      if (o.kind == ExprKind::Binary && o.text == c.text) return;
    auto l = first_decl(ctx, c.operands[0]);
    auto r = first_decl(ctx, c.operands[1]);
    if (!l || !r || *l == *r) return;
    out.push_back({&c, descending ? *l > *r : *l < *r});
  });
  return out;
}

}  // namespace

std::vector<Candidate> candidates_T14(const Context& ctx) {
  auto conds = ordered_conditions(ctx);
  size_t pending = std::count_if(conds.begin(), conds.end(), [](const Ordered& o) { return !o.follows; });
  if (pending == 0) return {};
  Candidate c;
  c.category = "module";
  c.key = ctx.mod.name;
  c.description = "reorder operands of " + std::to_string(pending) + " conditions";
  c.params = {static_cast<uint8_t>(ctx.derive("T14")[0] & 1)};
  c.edit = [&ctx](Rewriter& rw) {
    for (const auto& o : ordered_conditions(ctx)) {
      if (o.follows) continue;
      const Expr& l = o.cond->operands[0];
      const Expr& r = o.cond->operands[1];
      rw.replace(l.span, ctx.text(r.span));
      rw.replace(r.span, ctx.text(l.span));
    }
  };
  return {std::move(c)};
}

int signature_T14(const Context& ctx) {
  auto conds = ordered_conditions(ctx);
  if (conds.empty()) return 0;
  for (const auto& o : conds)
    if (!o.follows) return 0;
  return 1;
}

// ------------------------------------------------------------------ T15

std::vector<Candidate> candidates_T15(const Context& ctx) {
  std::vector<Candidate> out;
  const ModuleDecl& m = ctx.mod;
  if (m.ports.empty() || ctx.syms.find(kTriggerPort) || instantiated(ctx.ast, m.name)) return out;

  struct Carrier {
    const Port* port;
    int width;
    const Item* block;
    bool nonblocking;
  };
  std::vector<Carrier> carriers;
  for (const auto& p : m.ports) {
    const Symbol* s = ctx.syms.find(p.name);
    if (p.dir != Direction::Output || p.kind != NetKind::Reg || !s || s->width < 8) continue;
    const Item* block = nullptr;
    bool ok = !s->drivers.empty();
    for (const auto& d : s->drivers) {
      const Item* owner = nullptr;
      for (const auto& it : m.items)
        if (it.span.begin <= d.begin && d.end <= it.span.end) owner = &it;
      auto* al = owner ? owner->as<Always>() : nullptr;
      if (!al || !al->control.has_edges() || (block && block != owner)) ok = false;
      block = owner;
    }
    if (!ok) continue;
    bool nonblocking = true;
    bool seen = false;
    visit_stmt(block->as<Always>()->body, [&](const Stmt& st) {
      if (seen || st.kind != StmtKind::Assign) return;
      lhs_targets(st.cond, [&](const Expr& t) {
        if (t.text == p.name) seen = true;
      });
      if (seen) nonblocking = st.nonblocking;
    });
    carriers.push_back({&p, s->width, block, nonblocking});
  }
  std::stable_sort(carriers.begin(), carriers.end(),
                   [](const Carrier& a, const Carrier& b) { return a.width > b.width; });

  for (const auto& car : carriers) {
    Candidate c;
    c.category = "carrier";
    c.key = car.port->name;
    c.description = "trigger-gated " + std::to_string(car.width) + "-bit payload constant on '" +
                    car.port->name + "'";
    c.edit = [&ctx, car](Rewriter& rw) {
      if (!ctx.payload) throw Error("internal: T15 applied without a payload");
      BitVec k = carrier_constant(*ctx.payload, ctx.key, car.width);
      std::string lit = std::to_string(car.width) + "'h" +
                        format_digits(k, 16, true, (car.width + 3) / 4);
      std::string guard = "if (" + std::string(kTriggerPort) + ") " + car.port->name +
                          (car.nonblocking ? " <= " : " = ") + lit + ";";

      const ModuleDecl& m = ctx.mod;
      const Port& last = m.ports.back();
      if (starts_line(ctx.src, last.span.begin))
        rw.insert(last.span.end, ",\n" + line_leading(ctx.src, last.span.begin) + "input " +
                                     kTriggerPort);
      else
        rw.insert(last.span.end, std::string(", input ") + kTriggerPort);

      const Always& al = *car.block->as<Always>();
      const Stmt* body = &al.body;
      if (body->kind == StmtKind::Block && body->stmts.size() == 1) body = &body->stmts[0];
      if (al.control.events.size() >= 2 && body->kind == StmtKind::If && body->else_stmt)
        append_to_stmt(ctx, rw, *body->else_stmt, guard);
      else
        append_to_stmt(ctx, rw, al.body, guard);
    };
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

// Trigger-guarded constant assignments: (carrier constant) per guard.
std::vector<BitVec> guarded_constants(const Context& ctx) {
  std::vector<BitVec> out;
  for_each_stmt(ctx.mod, [&](const Stmt& s) {
    if (s.kind != StmtKind::If || s.else_stmt) return;
    const Expr& c = s.cond.unparen();
    if (!c.is_ident()) return;
    const Symbol* trig = symbol_at(ctx.syms, c);
    if (!trig || trig->kind != SymbolKind::Port || trig->dir != Direction::Input ||
        trig->width != 1 || trig->uses.size() != 1)
      return;
    const Stmt& a = *s.then_stmt;
    if (a.kind != StmtKind::Assign || !a.cond.is_ident()) return;
    const Symbol* dst = symbol_at(ctx.syms, a.cond);
    const Expr& r = a.rhs.unparen();
    if (!dst || dst->kind != SymbolKind::Port || dst->dir != Direction::Output) return;
    if (r.kind != ExprKind::Number || r.number.has_unknown() || r.number.value.width() < 8) return;
    out.push_back(r.number.value);
  });
  return out;
}

}  // namespace

int signature_T15(const Context& ctx) {
  int n = 0;
  uint8_t tag = payload_tag(ctx.key);
  for (const auto& v : guarded_constants(ctx)) n += (v.to_u64() & 0xFF) == tag;
  return n;
}

}  // namespace rtlmark::rules
