// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "rtlmark/fsm.hpp"
#include "rtlmark/verilog/printer.hpp"
#include "rtlmark/verilog/visit.hpp"
#include "rule_impl.hpp"

namespace rtlmark::rules {

using namespace vlog;

namespace {

// Keyed Fisher-Yates permutation of 0..n-1.
std::vector<int> keyed_permutation(const Context& ctx, std::string_view rule, size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (size_t i = n; i > 1; --i) {
    uint64_t r = ctx.derive_u64(rule, "n=" + std::to_string(n) + "|" + std::to_string(i - 1));
    std::swap(p[i - 1], p[r % i]);
  }
  return p;
}

const Item* item_declaring(const ModuleDecl& m, const std::string& name) {
  for (const auto& it : m.items)
    if (auto* n = it.as<NetDecl>())
      for (const auto& d : n->names)
        if (d.name == name) return &it;
  return nullptr;
}

bool is_literal_range(const std::optional<Range>& r) {
  return r && r->msb.kind == ExprKind::Number && r->lsb.kind == ExprKind::Number &&
         !r->msb.number.has_unknown() && !r->lsb.number.has_unknown();
}

int64_t literal_value(const Expr& e) { return static_cast<int64_t>(e.number.value.to_u64()); }

}  // namespace

// ------------------------------------------------------------------- T1

namespace {

std::vector<int> t1_permutation(const Context& ctx, size_t k) {
  return keyed_permutation(ctx, "T1", k);
}

}  // namespace

std::vector<Candidate> candidates_T1(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& sm : find_state_machines(ctx.ast, ctx.mod, ctx.syms)) {
    size_t k = sm.states.size();
    if (sm.is_one_hot() || k > 64) continue;
    Candidate c;
    c.category = "fsm";
    c.key = sm.vars[0];
    c.description = "one-hot encode " + std::to_string(k) + " states of '" + sm.vars[0] + "'";
    auto perm = t1_permutation(ctx, k);
    for (int b : perm) c.params.push_back(static_cast<uint8_t>(b));
    c.edit = [&ctx, sm, perm, k](Rewriter& rw) {
      for (const auto& it : ctx.mod.items) {
        auto* pd = it.as<ParamDecl>();
        if (!pd) continue;
        for (const auto& p : pd->params) {
          auto pos = std::find(sm.states.begin(), sm.states.end(), p.name);
          if (pos == sm.states.end()) continue;
          BitVec v(static_cast<int>(k));
          v.set_bit(perm[pos - sm.states.begin()], true);
          rw.replace(p.value.span, std::to_string(k) + "'b" + format_digits(v, 2, false, k));
        }
      }
      std::string range = "[" + std::to_string(k - 1) + ":0]";
      for (const auto& v : sm.vars) {
        const Item* it = item_declaring(ctx.mod, v);
        const auto& nd = *it->as<NetDecl>();
        if (nd.range)
          rw.replace(nd.range->span, range);
        else
          rw.insert(nd.span.begin + 3, " " + range);
      }
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T1(const Context& ctx) {
  int n = 0;
  for (const auto& sm : find_state_machines(ctx.ast, ctx.mod, ctx.syms)) {
    if (!sm.is_one_hot()) continue;
    auto perm = t1_permutation(ctx, sm.states.size());
    bool match = true;
    for (size_t i = 0; i < sm.states.size(); ++i)
      if (!sm.values.at(sm.states[i]).bit(perm[i])) match = false;
    n += match;
  }
  return n;
}

// ------------------------------------------------------------------- T2

namespace {

struct RangeUse {
  const Range* range;
  bool is_port;
  size_t order;  // source offset
};

std::map<std::pair<int64_t, int64_t>, std::vector<RangeUse>> literal_range_groups(
    const ModuleDecl& m) {
  std::map<std::pair<int64_t, int64_t>, std::vector<RangeUse>> groups;
  for (const auto& p : m.ports)
    if (!p.continuation && is_literal_range(p.range))
      groups[{literal_value(p.range->msb), literal_value(p.range->lsb)}].push_back(
          {&*p.range, true, p.range->span.begin});
  for (const auto& it : m.items)
    if (auto* n = it.as<NetDecl>(); n && is_literal_range(n->range))
      groups[{literal_value(n->range->msb), literal_value(n->range->lsb)}].push_back(
          {&*n->range, false, it.span.begin});
  return groups;
}

std::string fresh_name(const Context& ctx, const std::string& stem, const Bytes& bytes,
                       bool upper = false) {
  for (size_t n = 2; n <= bytes.size(); ++n) {
    std::string s = keyed_letters(bytes, n);
    if (upper) std::transform(s.begin(), s.end(), s.begin(), ::toupper);
    if (!name_taken(ctx, stem + s)) return stem + s;
  }
  return {};
}

}  // namespace

std::vector<Candidate> candidates_T2(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& [bounds, uses] : literal_range_groups(ctx.mod)) {
    auto [msb, lsb] = bounds;
    if (uses.size() < 2 || (msb != 0) == (lsb != 0)) continue;
    bool use_msb = msb != 0;
    int64_t value = use_msb ? msb : lsb;
    std::string key = std::to_string(msb) + ":" + std::to_string(lsb);
    std::string name = fresh_name(ctx, "width_", ctx.derive("T2", key));
    if (name.empty()) continue;
    Candidate c;
    c.category = "range";
    c.key = key;
    c.description = "parameterize [" + key + "] as " + name + " across " +
                    std::to_string(uses.size()) + " declarations";
    c.params = ctx.derive("T2", key);
    c.edit = [&ctx, uses, use_msb, value, name](Rewriter& rw) {
      bool any_port = false;
      size_t first_item = Span::npos;
      for (const auto& u : uses) {
        rw.replace(use_msb ? u.range->msb.span : u.range->lsb.span, name);
        if (u.is_port)
          any_port = true;
        else
          first_item = std::min(first_item, u.order);
      }
      std::string decl = name + " = " + std::to_string(value);
      const ModuleDecl& m = ctx.mod;
      if (any_port) {
        if (!m.header_params.empty())
          rw.insert(m.header_params.back().span.end, ", parameter " + decl);
        else
          rw.insert(m.name_span.end, " #(parameter " + decl + ")");
      } else {
        rw.insert(first_item, own_line(ctx.src, first_item, "localparam " + decl + ";"));
      }
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T2(const Context& ctx) {
  std::set<size_t> bare_bounds;
  auto note = [&](const std::optional<Range>& r) {
    if (!r) return;
    if (r->msb.is_ident()) bare_bounds.insert(r->msb.span.begin);
    if (r->lsb.is_ident()) bare_bounds.insert(r->lsb.span.begin);
  };
  for (const auto& p : ctx.mod.ports)
    if (!p.continuation) note(p.range);
  for (const auto& it : ctx.mod.items)
    if (auto* n = it.as<NetDecl>()) note(n->range);
  for_each_stmt(ctx.mod, [&](const Stmt& s) {
    for (const auto& d : s.decls) note(d.range);
  });
  int n = 0;
  for (const auto& s : ctx.syms.symbols) {
    if (s.kind != SymbolKind::Parameter || s.uses.size() < 2) continue;
    bool all = std::all_of(s.uses.begin(), s.uses.end(),
                           [&](const Span& u) { return bare_bounds.count(u.begin) > 0; });
    n += all;
  }
  return n;
}

// ------------------------------------------------------------------- T3

namespace {

struct T3Style {
  char base;  // lowercase target base
  bool pad;
  bool upper_digits;
};

T3Style t3_style(const Context& ctx) {
  Bytes b = ctx.derive("T3");
  return {"bodh"[b[0] % 4], (b[1] & 1) != 0, (b[2] & 1) != 0};
}

int radix_of(char base) {
  switch (base) {
    case 'b': return 2;
    case 'o': return 8;
    case 'h': return 16;
    default: return 10;
  }
}

std::string t3_digits(const NumberLiteral& lit, const T3Style& st) {
  int radix = radix_of(st.base);
  size_t min_digits = 0;
  if (st.pad && radix != 10) {
    int bits = radix == 2 ? 1 : radix == 8 ? 3 : 4;
    min_digits = (*lit.width + bits - 1) / bits;
  }
  return format_digits(lit.value, radix, st.upper_digits, min_digits);
}

bool t3_eligible(const Expr& e) {
  return e.kind == ExprKind::Number && e.number.width && e.number.based &&
         !e.number.has_unknown() && *e.number.width <= 64;
}

bool t3_converted(const NumberLiteral& lit, const T3Style& st) {
  return lit.base_char == static_cast<char>(::toupper(st.base)) && lit.digits == t3_digits(lit, st);
}

std::vector<const Expr*> sized_literals(const ModuleDecl& m) {
  std::vector<const Expr*> out;
  for_each_expr_root(m, [&](const Expr& root) {
    visit_expr(root, [&](const Expr& e) {
      if (t3_eligible(e)) out.push_back(&e);
    });
  });
  return out;
}

}  // namespace

std::vector<Candidate> candidates_T3(const Context& ctx) {
  T3Style st = t3_style(ctx);
  auto lits = sized_literals(ctx.mod);
  size_t pending = std::count_if(lits.begin(), lits.end(),
                                 [&](const Expr* e) { return !t3_converted(e->number, st); });
  if (pending == 0) return {};
  Candidate c;
  c.category = "module";
  c.key = ctx.mod.name;
  c.description = "convert " + std::to_string(pending) + " literals to base '" +
                  std::string(1, static_cast<char>(::toupper(st.base))) + "'";
  c.params = {static_cast<uint8_t>(st.base), st.pad, st.upper_digits};
  c.edit = [&ctx, st](Rewriter& rw) {
    for (const Expr* e : sized_literals(ctx.mod)) {
      const NumberLiteral& lit = e->number;
      if (t3_converted(lit, st)) continue;
      rw.replace(e->span, std::to_string(*lit.width) + "'" + (lit.is_signed ? "s" : "") +
                              static_cast<char>(::toupper(st.base)) + t3_digits(lit, st));
    }
  };
  return {std::move(c)};
}

int signature_T3(const Context& ctx) {
  T3Style st = t3_style(ctx);
  auto lits = sized_literals(ctx.mod);
  if (lits.empty()) return 0;
  for (const Expr* e : lits)
    if (!t3_converted(e->number, st)) return 0;
  return 1;
}

// ------------------------------------------------------------------- T4

std::vector<Candidate> candidates_T4(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& it : ctx.mod.items) {
    auto* al = it.as<Always>();
    if (!al) continue;
    const auto& ec = al->control;
    if (std::find(ec.separators.begin(), ec.separators.end(), "or") == ec.separators.end())
      continue;
    std::string key;
    for (const auto& ev : ec.events) {
      if (!key.empty()) key += ",";
      if (ev.edge == Edge::Posedge) key += "posedge ";
      if (ev.edge == Edge::Negedge) key += "negedge ";
      key += print_expr(ev.signal);
    }
    Candidate c;
    c.category = "events";
    c.key = key;
    c.description = "comma-separate @(" + key + ")";
    const EventControl* ecp = &ec;
    c.edit = [ecp](Rewriter& rw) {
      for (size_t i = 0; i < ecp->separators.size(); ++i)
        if (ecp->separators[i] == "or") rw.replace(ecp->separator_spans[i], ",");
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T4(const Context& ctx) {
  int n = 0;
  for (const auto& it : ctx.mod.items)
    if (auto* al = it.as<Always>())
      n += al->control.separator_style() == EventControl::Style::Comma;
  return n;
}

// ------------------------------------------------------------------- T5

namespace {

struct T5Style {
  size_t group;
  bool msb_anchor;
};

T5Style t5_style(const Context& ctx) {
  static constexpr size_t kGroups[] = {2, 3, 5, 6};
  Bytes b = ctx.derive("T5");
  return {kGroups[b[0] % 4], (b[1] & 1) != 0};
}

std::vector<int> t5_separators(size_t n, const T5Style& st) {
  std::vector<int> out;
  if (st.msb_anchor) {
    for (size_t p = st.group; p < n; p += st.group) out.push_back(static_cast<int>(p));
  } else {
    for (size_t t = 1; t * st.group < n; ++t) out.push_back(static_cast<int>(n - t * st.group));
    std::reverse(out.begin(), out.end());
  }
  return out;
}

bool t5_subject(const Expr& e, const T5Style& st) {
  return e.kind == ExprKind::Number && e.number.based && e.number.radix() == 2 &&
         e.number.digits.size() >= 5 && e.number.digits.size() > st.group;
}

std::vector<const Expr*> binary_literals(const ModuleDecl& m, const T5Style& st) {
  std::vector<const Expr*> out;
  for_each_expr_root(m, [&](const Expr& root) {
    visit_expr(root, [&](const Expr& e) {
      if (t5_subject(e, st)) out.push_back(&e);
    });
  });
  return out;
}

}  // namespace

std::vector<Candidate> candidates_T5(const Context& ctx) {
  T5Style st = t5_style(ctx);
  auto lits = binary_literals(ctx.mod, st);
  size_t pending = std::count_if(lits.begin(), lits.end(),
                                 [](const Expr* e) { return e->number.separators.empty(); });
  if (pending == 0) return {};
  Candidate c;
  c.category = "module";
  c.key = ctx.mod.name;
  c.description = "group " + std::to_string(pending) + " binary literals by " +
                  std::to_string(st.group) + (st.msb_anchor ? " from the MSB" : " from the LSB");
  c.params = {static_cast<uint8_t>(st.group), st.msb_anchor};
  c.edit = [&ctx, st](Rewriter& rw) {
    for (const Expr* e : binary_literals(ctx.mod, st)) {
      const NumberLiteral& lit = e->number;
      if (!lit.separators.empty()) continue;
      std::string text = ctx.text(e->span);
      size_t q = text.find('\'');
      size_t b = text.find_first_of("bB", q);
      std::string out = text.substr(0, b + 1);
      auto seps = t5_separators(lit.digits.size(), st);
      size_t s = 0;
      for (size_t i = 0; i < lit.digits.size(); ++i) {
        if (s < seps.size() && static_cast<size_t>(seps[s]) == i) {
          out += '_';
          ++s;
        }
        out += lit.digits[i];
      }
      rw.replace(e->span, out);
    }
  };
  return {std::move(c)};
}

int signature_T5(const Context& ctx) {
  T5Style st = t5_style(ctx);
  auto lits = binary_literals(ctx.mod, st);
  if (lits.empty()) return 0;
  for (const Expr* e : lits)
    if (e->number.separators != t5_separators(e->number.digits.size(), st)) return 0;
  return 1;
}

// ------------------------------------------------------------------- T6

std::string t6_suffix(const Context& ctx, const std::string& stem) {
  return "_" + keyed_letters(ctx.derive("T6", stem), 2);
}

std::vector<Candidate> candidates_T6(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& s : ctx.syms.symbols) {
    if (s.kind != SymbolKind::Net || !s.scope.empty()) continue;
    std::string renamed = s.name + t6_suffix(ctx, s.name);
    if (name_taken(ctx, renamed)) continue;
    const Item* decl = item_declaring(ctx.mod, s.name);
    if (!decl) continue;
    Candidate c;
    c.category = "net";
    c.key = s.name;
    c.description = "rename '" + s.name + "' to '" + renamed + "'";
    c.params = ctx.derive("T6", s.name);
    std::string name = s.name;
    c.edit = [&ctx, decl, name, renamed](Rewriter& rw) {
      rename_symbols(rw, ctx.syms, {{name, renamed}});
      std::string kind = t13_kind_word(decl->as<NetDecl>()->kind);
      std::string old_comment = t13_comment(ctx, kind, name);
      for (const auto& cm : decl->comments)
        if (cm.text == old_comment) rw.replace(cm.span, t13_comment(ctx, kind, renamed));
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T6(const Context& ctx) {
  int n = 0;
  for (const auto& s : ctx.syms.symbols) {
    if (s.kind != SymbolKind::Net || !s.scope.empty() || s.name.size() < 4) continue;
    std::string stem = s.name.substr(0, s.name.size() - 3);
    n += s.name.substr(stem.size()) == t6_suffix(ctx, stem);
  }
  return n;
}

// ------------------------------------------------------------------- T7

namespace {

struct T7Target {
  const Item* item;
  std::set<std::string> names;
  int64_t msb, lsb;
};

bool refers_to(const ModuleSymbols& syms, const Expr& base, const std::set<std::string>& names) {
  return base.is_ident() && names.count(base.text) && symbol_at(syms, base) != nullptr;
}

}  // namespace

std::vector<Candidate> candidates_T7(const Context& ctx) {
  std::vector<Candidate> out;
  for (const auto& it : ctx.mod.items) {
    auto* nd = it.as<NetDecl>();
    if (!nd || nd->kind == NetKind::Integer || !is_literal_range(nd->range)) continue;
    int64_t msb = literal_value(nd->range->msb), lsb = literal_value(nd->range->lsb);
    if (msb <= lsb) continue;
    T7Target t{&it, {}, msb, lsb};
    for (const auto& d : nd->names) t.names.insert(d.name);

    // Every select on these names must be mirrorable without overlapping edits.
    bool ok = true;
    for_each_expr_root(ctx.mod, [&](const Expr& root) {
      visit_expr(root, [&](const Expr& e) {
        if (e.operands.empty() || !refers_to(ctx.syms, e.operands[0], t.names)) return;
        if (e.kind == ExprKind::IndexedPartSelect) ok = false;
        if (e.kind == ExprKind::PartSelect &&
            (!const_int(e.operands[1], ctx.syms.params) ||
             !const_int(e.operands[2], ctx.syms.params)))
          ok = false;
        if (e.kind == ExprKind::Index && !const_int(e.operands[1], ctx.syms.params))
          visit_expr(e.operands[1], [&](const Expr& x) {
            if (x.is_ident() && t.names.count(x.text)) ok = false;
          });
      });
    });
    if (!ok) continue;

    Candidate c;
    c.category = "decl";
    c.key = nd->names.front().name;
    c.description = "reverse bit order of '" + c.key + "' to [" + std::to_string(lsb) + ":" +
                    std::to_string(msb) + "]";
    c.edit = [&ctx, t](Rewriter& rw) {
      const auto& r = *t.item->as<NetDecl>()->range;
      rw.replace(r.span, "[" + ctx.text(r.lsb.span) + ":" + ctx.text(r.msb.span) + "]");
      int64_t sum = t.msb + t.lsb;
      auto mirror = [&](const Expr& idx) {
        if (auto v = const_int(idx, ctx.syms.params))
          rw.replace(idx.span, std::to_string(sum - *v));
        else
          rw.replace(idx.span, std::to_string(sum) + " - " + operand_text(ctx, idx));
      };
      for_each_expr_root(ctx.mod, [&](const Expr& root) {
        visit_expr(root, [&](const Expr& e) {
          if (e.operands.empty() || !refers_to(ctx.syms, e.operands[0], t.names)) return;
          if (e.kind == ExprKind::Index) mirror(e.operands[1]);
          if (e.kind == ExprKind::PartSelect) {
            mirror(e.operands[1]);
            mirror(e.operands[2]);
          }
        });
      });
    };
    out.push_back(std::move(c));
  }
  return out;
}

int signature_T7(const Context& ctx) {
  int n = 0;
  for (const auto& it : ctx.mod.items) {
    auto* nd = it.as<NetDecl>();
    if (!nd || !is_literal_range(nd->range)) continue;
    n += literal_value(nd->range->msb) < literal_value(nd->range->lsb);
  }
  return n;
}

}  // namespace rtlmark::rules
