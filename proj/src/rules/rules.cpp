// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/parser.hpp"
#include "rtlmark/verilog/visit.hpp"
#include "rule_impl.hpp"

namespace rtlmark {

namespace {

using G = Granularity;

const std::array<RuleInfo, kRuleCount> kCatalog{{
    {RuleId::T1, "T1", "State Variables Encoding", G::Token, true, false,
     "binary state constants become one-hot with a keyed bit permutation",
     "finite state machine: state register with a case-based transition block"},
    {RuleId::T2, "T2", "Parameterize Module", G::Token, false, false,
     "shared literal range bound replaced by a new width parameter",
     "two or more declarations share the same literal range"},
    {RuleId::T3, "T3", "Base Conversion", G::Token, true, false,
     "sized literals rewritten in a keyed base and spelling, value preserved",
     "at least one sized literal without x/z bits outside the keyed base"},
    {RuleId::T4, "T4", "Sensitivity List Format", G::Token, false, false,
     "'or' separators in event lists become commas",
     "event list separated by 'or'"},
    {RuleId::T5, "T5", "Bit Separation", G::Token, true, false,
     "binary literals grouped with '_' at a keyed group size and anchor",
     "binary literal with at least five digits and no separators"},
    {RuleId::T6, "T6", "Variable Renaming", G::Token, true, true,
     "internal signal renamed with a keyed two-letter suffix",
     "internal (non-port) signal"},
    {RuleId::T7, "T7", "Bit Order", G::Token, false, false,
     "descending range [M:L] becomes [L:M] with every select mirrored",
     "internal vector with a literal descending range and no indexed part-selects"},
    {RuleId::T8, "T8", "State Transition Path", G::Statement, true, false,
     "unreachable detour state added whose transition re-enters a keyed state",
     "finite state machine with an unused encoding"},
    {RuleId::T9, "T9", "Combinational Logic Operators", G::Statement, false, false,
     "AND/OR expression rewritten by De Morgan's law",
     "binary &, |, && or || expression"},
    {RuleId::T10, "T10", "Combinational Assignment", G::Statement, false, false,
     "continuous assignment becomes an always @* block",
     "single-target continuous assignment to a wire with one driver"},
    {RuleId::T11, "T11", "Ternary Operator", G::Statement, false, false,
     "two-armed if/else assigning one target becomes a ternary assignment",
     "if/else whose arms assign the same target with matching widths"},
    {RuleId::T12, "T12", "Initialization Order", G::Statement, true, false,
     "independent constant assignments reordered by a keyed permutation",
     "run of two or more constant assignments to distinct signals"},
    {RuleId::T13, "T13", "Add Comments", G::Statement, true, true,
     "keyed comment line added before a signal declaration",
     "single-signal internal declaration"},
    {RuleId::T14, "T14", "Conditional Order", G::Statement, true, false,
     "operands of & and && in conditions ordered by a keyed direction",
     "if condition joining operands with & or &&"},
    {RuleId::T15, "T15", "Add Redundant Logic", G::Statement, true, false,
     "trigger-gated assignment of the encrypted payload constant",
     "output register of at least 8 bits assigned in one clocked block"},
}};

using rules::Candidate;
using rules::Context;

struct Located {
  Candidate cand;
  std::string path;
};

std::vector<Located> located(const Context& ctx, RuleId id) {
  std::vector<Located> out;
  std::map<std::pair<std::string, std::string>, int> seen;
  for (auto& c : rules::impl(id).candidates(ctx)) {
    int ord = seen[{c.category, c.key}]++;
    std::string path = c.category + "|" + c.key + "|" + std::to_string(ord);
    out.push_back({std::move(c), std::move(path)});
  }
  return out;
}

vlog::Ast reparse(const vlog::Ast& ast, std::string text) {
  return vlog::parse(vlog::SourceText{std::move(text), ast.origin});
}

}  // namespace

const std::array<RuleInfo, kRuleCount>& rule_catalog() { return kCatalog; }

const RuleInfo& rule_info(RuleId id) { return kCatalog.at(rule_index(id)); }

std::string rule_code(RuleId id) { return rule_info(id).code; }

std::optional<RuleId> parse_rule_id(const std::string& code) {
  for (const auto& r : kCatalog)
    if (code == r.code) return r.id;
  return std::nullopt;
}

int application_rank(RuleId id) {
  int n = static_cast<int>(id);
  if (id == RuleId::T6) return 100;
  if (rule_info(id).granularity == Granularity::Statement) return n;
  return 20 + n;
}

std::vector<TransformSite> applicable_sites(const vlog::Ast& ast, RuleId rule,
                                            const WatermarkKey& key) {
  std::vector<TransformSite> out;
  vlog::SymbolTable table = vlog::resolve(ast);
  for (size_t i = 0; i < ast.modules.size(); ++i) {
    const auto& m = ast.modules[i];
    Context ctx{ast, table, m, table.modules[i], key, *ast.source, nullptr};
    for (auto& l : located(ctx, rule))
      out.push_back({rule, m.name, l.path, l.cand.description});
  }
  return out;
}

std::vector<TransformSite> all_applicable_sites(const vlog::Ast& ast, const WatermarkKey& key) {
  std::vector<TransformSite> out;
  for (const auto& r : kCatalog) {
    auto s = applicable_sites(ast, r.id, key);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::pair<vlog::Ast, TransformationRecord> apply(const vlog::Ast& ast, const TransformSite& site,
                                                 const WatermarkKey& key, const Payload& payload) {
  vlog::SymbolTable table = vlog::resolve(ast);
  const std::string& src = *ast.source;
  for (size_t i = 0; i < ast.modules.size(); ++i) {
    const auto& m = ast.modules[i];
    if (m.name != site.module) continue;
    Context ctx{ast, table, m, table.modules[i], key, src, &payload};
    for (auto& l : located(ctx, site.rule)) {
      if (l.path != site.path) continue;
      Rewriter rw(src);
      l.cand.edit(rw);
      std::string text = rw.result();
      vlog::Ast out = reparse(ast, text);

      TransformationRecord rec;
      rec.site = site;
      rec.site.description = l.cand.description;
      rec.params = l.cand.params;
      size_t pre = 0;
      while (pre < src.size() && pre < text.size() && src[pre] == text[pre]) ++pre;
      size_t suf = 0;
      while (suf < src.size() - pre && suf < text.size() - pre &&
             src[src.size() - 1 - suf] == text[text.size() - 1 - suf])
        ++suf;
      rec.offset = pre;
      rec.before = src.substr(pre, src.size() - pre - suf);
      rec.after = text.substr(pre, text.size() - pre - suf);
      return {std::move(out), std::move(rec)};
    }
  }
  throw SiteStale("site " + rule_code(site.rule) + " " + site.module + ":" + site.path +
                  " no longer resolves");
}

SignatureEvidence signature_present(const vlog::Ast& ast, RuleId rule, const WatermarkKey& key) {
  vlog::SymbolTable table = vlog::resolve(ast);
  SignatureEvidence ev;
  ev.rule = rule;
  ev.name_dependent = rule_info(rule).name_dependent;
  for (size_t i = 0; i < ast.modules.size(); ++i) {
    Context ctx{ast, table, ast.modules[i], table.modules[i], key, *ast.source, nullptr};
    ev.strength += rules::impl(rule).signature(ctx);
  }
  ev.present = ev.strength > 0;
  return ev;
}

std::vector<SignatureEvidence> scan_signatures(const vlog::Ast& ast, const WatermarkKey& key) {
  vlog::SymbolTable table = vlog::resolve(ast);
  std::vector<SignatureEvidence> out;
  for (const auto& r : kCatalog) {
    SignatureEvidence ev;
    ev.rule = r.id;
    ev.name_dependent = r.name_dependent;
    for (size_t i = 0; i < ast.modules.size(); ++i) {
      Context ctx{ast, table, ast.modules[i], table.modules[i], key, *ast.source, nullptr};
      ev.strength += rules::impl(r.id).signature(ctx);
    }
    ev.present = ev.strength > 0;
    out.push_back(ev);
  }
  return out;
}

namespace rules {

const RuleImpl& impl(RuleId id) {
  static const std::array<RuleImpl, kRuleCount> table{{
      {RuleId::T1, candidates_T1, signature_T1},
      {RuleId::T2, candidates_T2, signature_T2},
      {RuleId::T3, candidates_T3, signature_T3},
      {RuleId::T4, candidates_T4, signature_T4},
      {RuleId::T5, candidates_T5, signature_T5},
      {RuleId::T6, candidates_T6, signature_T6},
      {RuleId::T7, candidates_T7, signature_T7},
      {RuleId::T8, candidates_T8, signature_T8},
      {RuleId::T9, candidates_T9, signature_T9},
      {RuleId::T10, candidates_T10, signature_T10},
      {RuleId::T11, candidates_T11, signature_T11},
      {RuleId::T12, candidates_T12, signature_T12},
      {RuleId::T13, candidates_T13, signature_T13},
      {RuleId::T14, candidates_T14, signature_T14},
      {RuleId::T15, candidates_T15, signature_T15},
  }};
  return table.at(rule_index(id));
}

std::string keyed_letters(const Bytes& bytes, size_t n) {
  std::string out;
  for (size_t i = 0; i < n; ++i) out += static_cast<char>('a' + bytes.at(i) % 26);
  return out;
}

void for_each_stmt(const vlog::ModuleDecl& m, const std::function<void(const vlog::Stmt&)>& f) {
  for (const auto& it : m.items)
    if (auto* al = it.as<vlog::Always>()) vlog::visit_stmt(al->body, f);
}

void for_each_expr_root(const vlog::ModuleDecl& m,
                        const std::function<void(const vlog::Expr&)>& f) {
  auto range = [&](const std::optional<vlog::Range>& r) {
    if (r) {
      f(r->msb);
      f(r->lsb);
    }
  };
  for (const auto& d : m.header_params) {
    range(d.range);
    for (const auto& p : d.params) f(p.value);
  }
  for (const auto& p : m.ports)
    if (!p.continuation) range(p.range);
  for (const auto& it : m.items) {
    if (auto* n = it.as<vlog::NetDecl>()) {
      range(n->range);
      for (const auto& d : n->names)
        if (d.init) f(*d.init);
    } else if (auto* pd = it.as<vlog::ParamDecl>()) {
      range(pd->range);
      for (const auto& p : pd->params) f(p.value);
    } else if (auto* ca = it.as<vlog::ContAssign>()) {
      for (const auto& [l, r] : ca->assigns) {
        f(l);
        f(r);
      }
    } else if (auto* al = it.as<vlog::Always>()) {
      for (const auto& ev : al->control.events) f(ev.signal);
      vlog::visit_stmt(al->body, [&](const vlog::Stmt& s) {
        for (const auto& d : s.decls) range(d.range);
        vlog::stmt_exprs(s, [&](const vlog::Expr& e, bool) { f(e); });
      });
    } else if (auto* in = it.as<vlog::Instance>()) {
      for (const auto& c : in->params)
        if (c.expr) f(*c.expr);
      for (const auto& c : in->ports)
        if (c.expr) f(*c.expr);
    }
  }
}

bool is_primary(const vlog::Expr& e) {
  using vlog::ExprKind;
  switch (e.kind) {
    case ExprKind::Identifier:
    case ExprKind::Number:
    case ExprKind::Concat:
    case ExprKind::Replicate:
    case ExprKind::Index:
    case ExprKind::PartSelect:
    case ExprKind::IndexedPartSelect:
    case ExprKind::Paren:
      return true;
    default:
      return false;
  }
}

std::string operand_text(const Context& ctx, const vlog::Expr& e) {
  std::string t = ctx.text(e.span);
  return is_primary(e) ? t : "(" + t + ")";
}

vlog::Lookup width_lookup(const vlog::ModuleSymbols& syms,
                          std::vector<vlog::SignalValue>& storage) {
  storage.clear();
  storage.reserve(syms.symbols.size());
  for (const auto& s : syms.symbols) {
    vlog::SignalValue v;
    if (s.kind == vlog::SymbolKind::Parameter) {
      if (auto it = syms.params.find(s.name); it != syms.params.end()) v = it->second;
    } else {
      v.value = BitVec::unknown(std::max(1, s.width));
      v.is_signed = s.is_signed;
      v.left = s.left.value_or(s.width - 1);
      v.right = s.right.value_or(0);
    }
    storage.push_back(v);
  }
  return [&syms, &storage](const std::string& name) -> const vlog::SignalValue* {
    auto it = syms.index.find(name);
    return it == syms.index.end() ? nullptr : &storage[it->second];
  };
}

bool name_taken(const Context& ctx, const std::string& name) {
  if (vlog::is_keyword(name)) return true;
  for (const auto& s : ctx.syms.symbols)
    if (s.name == name) return true;
  for (const auto& m : ctx.ast.modules)
    if (m.name == name) return true;
  return false;
}

const vlog::Symbol* symbol_at(const vlog::ModuleSymbols& syms, const vlog::Expr& ident) {
  const vlog::Symbol* s = syms.find(ident.text);
  if (!s || !s->scope.empty()) return nullptr;
  for (const auto& u : s->uses)
    if (u.begin == ident.span.begin) return s;
  return nullptr;
}

std::string own_line(const std::string& src, size_t offset, const std::string& text) {
  std::string indent = line_indent(src, offset);
  return text + "\n" + indent;
}

bool instantiated(const vlog::Ast& ast, const std::string& module) {
  for (const auto& m : ast.modules)
    for (const auto& it : m.items)
      if (auto* in = it.as<vlog::Instance>())
        if (in->module_name == module) return true;
  return false;
}

}  // namespace rules

}  // namespace rtlmark
