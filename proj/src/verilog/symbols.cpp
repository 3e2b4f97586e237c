// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/symbols.hpp"

#include <cstdlib>

#include "rtlmark/verilog/visit.hpp"

namespace rtlmark::vlog {

const Symbol* ModuleSymbols::find(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? nullptr : &symbols[it->second];
}

const ModuleSymbols* SymbolTable::module(const std::string& name) const {
  for (const auto& m : modules)
    if (m.module == name) return &m;
  return nullptr;
}

namespace {

class Resolver {
 public:
  Resolver(const Ast& ast, const ModuleDecl& m) : ast_(ast), m_(m) {
    out_.module = m.name;
    out_.params = module_params(m);
  }

  ModuleSymbols run() {
    declare_module_scope();
    for (const auto& d : m_.header_params)
      for (const auto& p : d.params) use_expr(p.value, false);
    for (const auto& p : m_.ports)
      if (p.range) use_range(*p.range);
    for (const auto& it : m_.items) walk_item(it);
    return std::move(out_);
  }

 private:
  const Ast& ast_;
  const ModuleDecl& m_;
  ModuleSymbols out_;
  std::vector<std::map<std::string, size_t>> scopes_;  // block-local scopes

  void range_info(Symbol& s, const std::optional<Range>& r) {
    if (!r) return;
    auto msb = const_int(r->msb, out_.params);
    auto lsb = const_int(r->lsb, out_.params);
    if (msb && lsb) {
      s.left = static_cast<int>(*msb);
      s.right = static_cast<int>(*lsb);
      s.width = static_cast<int>(std::llabs(*msb - *lsb) + 1);
    }
  }

  void add(Symbol s, bool module_scope) {
    s.order = out_.symbols.size();
    size_t idx = out_.symbols.size();
    if (module_scope) {
      auto [it, fresh] = out_.index.emplace(s.name, idx);
      if (!fresh)
        out_.diagnostics.push_back({Diagnostic::Kind::Duplicate, s.name, s.decl,
                                    "duplicate declaration of '" + s.name + "'"});
    }
    out_.symbols.push_back(std::move(s));
  }

  void declare_module_scope() {
    for (const auto& d : m_.header_params) {
      for (const auto& p : d.params) {
        Symbol s;
        s.name = p.name;
        s.kind = SymbolKind::Parameter;
        s.header_param = true;
        s.decl = p.name_span;
        if (auto it = out_.params.find(p.name); it != out_.params.end()) {
          s.width = it->second.value.width();
          s.is_signed = it->second.is_signed;
        }
        add(std::move(s), true);
      }
    }
    for (const auto& p : m_.ports) {
      Symbol s;
      s.name = p.name;
      s.kind = SymbolKind::Port;
      s.dir = p.dir;
      s.net_kind = p.kind;
      s.is_signed = p.is_signed || p.kind == NetKind::Integer;
      s.decl = p.name_span;
      if (p.kind == NetKind::Integer) s.width = 32;
      range_info(s, p.range);
      add(std::move(s), true);
    }
    for (const auto& it : m_.items) {
      if (auto* n = it.as<NetDecl>()) {
        for (const auto& d : n->names) {
          Symbol s;
          s.name = d.name;
          s.kind = SymbolKind::Net;
          s.net_kind = n->kind;
          s.is_signed = n->is_signed || n->kind == NetKind::Integer;
          s.decl = d.name_span;
          if (n->kind == NetKind::Integer) {
            s.width = 32;
            s.left = 31;
            s.right = 0;
          }
          range_info(s, n->range);
          add(std::move(s), true);
        }
      } else if (auto* pd = it.as<ParamDecl>()) {
        for (const auto& p : pd->params) {
          Symbol s;
          s.name = p.name;
          s.kind = SymbolKind::Parameter;
          s.local_param = pd->local;
          s.decl = p.name_span;
          if (auto f = out_.params.find(p.name); f != out_.params.end()) {
            s.width = f->second.value.width();
            s.is_signed = f->second.is_signed;
          }
          add(std::move(s), true);
        }
      } else if (auto* in = it.as<Instance>()) {
        Symbol s;
        s.name = in->name;
        s.kind = SymbolKind::Instance;
        s.decl = in->name_span;
        add(std::move(s), true);
      }
    }
  }

  Symbol* lookup(const std::string& name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &out_.symbols[f->second];
    }
    auto f = out_.index.find(name);
    return f == out_.index.end() ? nullptr : &out_.symbols[f->second];
  }

  void reference(const Expr& id, bool write) {
    Symbol* s = lookup(id.text);
    if (!s) {
      out_.diagnostics.push_back({Diagnostic::Kind::Unresolved, id.text, id.span,
                                  "unresolved identifier '" + id.text + "'"});
      return;
    }
    s->uses.push_back(id.span);
    if (write) s->drivers.push_back(id.span);
  }

  void use_expr(const Expr& e, bool write) {
    if (!write) {
      visit_expr(e, [&](const Expr& x) {
        if (x.is_ident()) reference(x, false);
      });
      return;
    }
    // Write position: the written names are drivers; index expressions are reads.
    std::vector<const Expr*> targets;
    lhs_targets(e, [&](const Expr& t) { targets.push_back(&t); });
    visit_expr(e, [&](const Expr& x) {
      if (!x.is_ident()) return;
      bool is_target = false;
      for (auto* t : targets) is_target = is_target || t == &x;
      reference(x, is_target);
    });
  }

  void use_range(const Range& r) {
    use_expr(r.msb, false);
    use_expr(r.lsb, false);
  }

  void walk_item(const Item& it) {
    if (auto* n = it.as<NetDecl>()) {
      if (n->range) use_range(*n->range);
      for (const auto& d : n->names) {
        if (!d.init) continue;
        use_expr(*d.init, false);
        // A net declaration assignment drives the declared net.
        if (Symbol* s = lookup(d.name)) s->drivers.push_back(d.name_span);
      }
    } else if (auto* pd = it.as<ParamDecl>()) {
      if (pd->range) use_range(*pd->range);
      for (const auto& p : pd->params) use_expr(p.value, false);
    } else if (auto* ca = it.as<ContAssign>()) {
      for (const auto& [l, r] : ca->assigns) {
        use_expr(l, true);
        use_expr(r, false);
      }
    } else if (auto* al = it.as<Always>()) {
      for (const auto& ev : al->control.events) use_expr(ev.signal, false);
      walk_stmt(al->body);
    } else if (auto* in = it.as<Instance>()) {
      const ModuleDecl* callee = ast_.find_module(in->module_name);
      for (const auto& c : in->params)
        if (c.expr) use_expr(*c.expr, false);
      for (size_t i = 0; i < in->ports.size(); ++i) {
        const Connection& c = in->ports[i];
        if (!c.expr) continue;
        bool drives = false;
        if (callee) {
          const Port* p = c.named ? callee->find_port(c.port)
                                  : (i < callee->ports.size() ? &callee->ports[i] : nullptr);
          drives = p && p->dir != Direction::Input;
        }
        use_expr(*c.expr, drives);
      }
    }
  }

  void walk_stmt(const Stmt& s) {
    bool pushed = false;
    if (s.kind == StmtKind::Block && !s.decls.empty()) {
      std::map<std::string, size_t> scope;
      for (const auto& d : s.decls) {
        if (d.range) use_range(*d.range);
        for (const auto& dc : d.names) {
          if (lookup(dc.name))
            out_.diagnostics.push_back({Diagnostic::Kind::Shadowed, dc.name, dc.name_span,
                                        "declaration of '" + dc.name + "' in block '" + s.label +
                                            "' shadows an outer declaration"});
          Symbol sym;
          sym.name = dc.name;
          sym.kind = SymbolKind::Net;
          sym.net_kind = d.kind;
          sym.is_signed = d.is_signed || d.kind == NetKind::Integer;
          sym.decl = dc.name_span;
          sym.scope = s.label;
          if (d.kind == NetKind::Integer) sym.width = 32;
          range_info(sym, d.range);
          scope[dc.name] = out_.symbols.size();
          add(std::move(sym), false);
        }
      }
      scopes_.push_back(std::move(scope));
      pushed = true;
    }
    stmt_exprs(s, [&](const Expr& e, bool is_lhs) { use_expr(e, is_lhs); });
    for (const auto& c : s.stmts) walk_stmt(c);
    if (s.then_stmt) walk_stmt(*s.then_stmt);
    if (s.else_stmt) walk_stmt(*s.else_stmt);
    for (const auto& ci : s.items) walk_stmt(*ci.body);
    if (pushed) scopes_.pop_back();
  }
};

}  // namespace

ModuleSymbols resolve_module(const Ast& ast, const ModuleDecl& m) {
  return Resolver(ast, m).run();
}

SymbolTable resolve(const Ast& ast) {
  SymbolTable t;
  for (const auto& m : ast.modules) t.modules.push_back(resolve_module(ast, m));
  return t;
}

}  // namespace rtlmark::vlog
