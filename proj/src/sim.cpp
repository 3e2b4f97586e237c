// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/sim.hpp"

#include <algorithm>
#include <unordered_map>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/eval.hpp"
#include "rtlmark/verilog/visit.hpp"

namespace rtlmark {

using namespace vlog;

namespace {

constexpr int kSettleLimit = 256;
constexpr int kDeltaLimit = 64;

int range_width(const std::optional<Range>& r, const ParamEnv& env, int& left, int& right) {
  left = 0;
  right = 0;
  if (!r) return 1;
  auto m = const_int(r->msb, env);
  auto l = const_int(r->lsb, env);
  if (!m || !l) throw UnsupportedConstruct("range bounds are not constant");
  left = static_cast<int>(*m);
  right = static_cast<int>(*l);
  return static_cast<int>(std::llabs(*m - *l) + 1);
}

}  // namespace

struct Simulator::Impl {
  const ModuleDecl* mod = nullptr;
  ParamEnv params;
  std::vector<SignalValue> sigs;
  std::unordered_map<std::string, size_t> index;
  std::vector<std::unordered_map<std::string, size_t>> scopes;
  std::vector<PortInfo> in_ports, out_ports;
  std::vector<std::string> edge_ins;

  struct Comb {
    const Expr* lhs = nullptr;  // continuous assignment
    const Expr* rhs = nullptr;
    const Stmt* body = nullptr;  // combinational always block
  };
  struct Seq {
    const Always* al;
    std::vector<BitVec> prev;
  };
  std::vector<Comb> comb;
  std::vector<Seq> seq;

  struct Update {
    size_t sig;
    std::vector<int> offsets;  // per value bit, -1 when out of range
    BitVec value;
  };
  std::vector<Update> nba;

  size_t declare(int width, bool is_signed, int left, int right) {
    SignalValue v;
    v.value = BitVec::unknown(width);
    v.is_signed = is_signed;
    v.left = left;
    v.right = right;
    size_t i = sigs.size();
    sigs.push_back(v);
    return i;
  }

  const SignalValue* lookup(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
      if (auto f = it->find(name); f != it->end()) return &sigs[f->second];
    auto f = index.find(name);
    return f == index.end() ? nullptr : &sigs[f->second];
  }

  size_t slot(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
      if (auto f = it->find(name); f != it->end()) return f->second;
    auto f = index.find(name);
    if (f == index.end()) throw UnsupportedConstruct("unknown identifier '" + name + "'");
    return f->second;
  }

  Evaluator evaluator() const {
    return Evaluator([this](const std::string& n) { return lookup(n); });
  }

  void build(const Ast& ast, const ModuleDecl& m) {
    mod = &m;
    params = module_params(m);
    for (const auto& [name, v] : params) index[name] = sigs.size(), sigs.push_back(v);
    int l, r;
    for (const auto& p : m.ports) {
      int w = p.kind == NetKind::Integer ? 32 : range_width(p.range, params, l, r);
      if (p.kind == NetKind::Integer) l = 31, r = 0;
      index[p.name] = declare(w, p.is_signed || p.kind == NetKind::Integer, l, r);
      (p.dir == Direction::Input ? in_ports : out_ports).push_back({p.name, w, p.dir});
    }
    for (const auto& it : m.items) {
      if (auto* n = it.as<NetDecl>()) {
        int w = n->kind == NetKind::Integer ? 32 : range_width(n->range, params, l, r);
        if (n->kind == NetKind::Integer) l = 31, r = 0;
        for (const auto& d : n->names) {
          index[d.name] = declare(w, n->is_signed || n->kind == NetKind::Integer, l, r);
          if (d.init) {
            Expr* lhs = new Expr(Expr::ident(d.name));
            owned.emplace_back(lhs);
            if (n->kind == NetKind::Wire)
              comb.push_back({lhs, &*d.init, nullptr});
            else
              initial.push_back({lhs, &*d.init, nullptr});
          }
        }
      } else if (auto* ca = it.as<ContAssign>()) {
        for (const auto& [lhs, rhs] : ca->assigns) comb.push_back({&lhs, &rhs, nullptr});
      } else if (auto* al = it.as<Always>()) {
        if (al->control.has_edges()) {
          for (const auto& ev : al->control.events)
            if (ev.edge == Edge::Level)
              throw UnsupportedConstruct("mixed edge and level event list");
          seq.push_back({al, {}});
        } else {
          comb.push_back({nullptr, nullptr, &al->body});
        }
        visit_stmt(al->body, [&](const Stmt& s) {
          for (const auto& d : s.decls) {
            int dl, dr;
            int w = d.kind == NetKind::Integer ? 32 : range_width(d.range, params, dl, dr);
            if (d.kind == NetKind::Integer) dl = 31, dr = 0;
            for (const auto& dc : d.names)
              local_slots[&s][dc.name] =
                  declare(w, d.is_signed || d.kind == NetKind::Integer, dl, dr);
          }
        });
      } else if (it.as<Instance>()) {
        throw UnsupportedConstruct("module instances are not simulated");
      }
    }
    for (const auto& al : seq)
      for (const auto& ev : al.al->control.events)
        visit_expr(ev.signal, [&](const Expr& x) {
          if (x.is_ident() && m.find_port(x.text) &&
              m.find_port(x.text)->dir == Direction::Input &&
              std::find(edge_ins.begin(), edge_ins.end(), x.text) == edge_ins.end())
            edge_ins.push_back(x.text);
        });
    (void)ast;
    Evaluator ev = evaluator();
    for (const auto& c : initial) write(*c.lhs, ev.eval_sized(*c.rhs, ev.self_width(*c.lhs)), false);
    for (auto& s : seq) s.prev = event_values(*s.al);
  }

  std::vector<std::unique_ptr<Expr>> owned;
  std::vector<Comb> initial;
  std::unordered_map<const Stmt*, std::unordered_map<std::string, size_t>> local_slots;

  // --------------------------------------------------------------- writes

  void targets(const Expr& lhs, std::vector<std::pair<size_t, std::vector<int>>>& out) {
    Evaluator ev = evaluator();
    switch (lhs.kind) {
      case ExprKind::Identifier: {
        size_t s = slot(lhs.text);
        std::vector<int> offs(sigs[s].value.width());
        for (size_t i = 0; i < offs.size(); ++i) offs[i] = static_cast<int>(i);
        out.push_back({s, offs});
        return;
      }
      case ExprKind::Index: {
        size_t s = slot(lhs.operands[0].text);
        auto i = ev.eval(lhs.operands[1]).to_int();
        auto off = i ? sigs[s].offset_of(*i) : std::nullopt;
        out.push_back({s, {off ? *off : -1}});
        return;
      }
      case ExprKind::PartSelect: {
        size_t s = slot(lhs.operands[0].text);
        const SignalValue& sv = sigs[s];
        auto m = ev.eval(lhs.operands[1]).to_int();
        auto l = ev.eval(lhs.operands[2]).to_int();
        if (!m || !l) throw UnsupportedConstruct("part-select bounds are not constant");
        int w = static_cast<int>(std::llabs(*m - *l) + 1);
        std::vector<int> offs(w);
        for (int k = 0; k < w; ++k) {
          int64_t idx = sv.left >= sv.right ? *l + k : *l - k;
          auto off = sv.offset_of(idx);
          offs[k] = off ? *off : -1;
        }
        out.push_back({s, offs});
        return;
      }
      case ExprKind::IndexedPartSelect: {
        size_t s = slot(lhs.operands[0].text);
        const SignalValue& sv = sigs[s];
        auto wv = ev.eval(lhs.operands[2]).to_int();
        if (!wv) throw UnsupportedConstruct("indexed part-select width is not constant");
        int w = static_cast<int>(*wv);
        std::vector<int> offs(w, -1);
        if (auto start = ev.eval(lhs.operands[1]).to_int()) {
          bool desc = sv.left >= sv.right;
          int64_t lsb = lhs.text == "+:" ? (desc ? *start : *start + w - 1)
                                         : (desc ? *start - w + 1 : *start);
          for (int k = 0; k < w; ++k) {
            auto off = sv.offset_of(desc ? lsb + k : lsb - k);
            offs[k] = off ? *off : -1;
          }
        }
        out.push_back({s, offs});
        return;
      }
      case ExprKind::Concat: {
        // Rightmost member holds the least significant bits.
        for (auto it = lhs.operands.rbegin(); it != lhs.operands.rend(); ++it) targets(*it, out);
        return;
      }
      case ExprKind::Paren:
        targets(lhs.operands[0], out);
        return;
      default:
        throw UnsupportedConstruct("unsupported assignment target");
    }
  }

  void write(const Expr& lhs, const BitVec& value, bool nonblocking) {
    std::vector<std::pair<size_t, std::vector<int>>> ts;
    targets(lhs, ts);
    int bit = 0;
    for (auto& [s, offs] : ts) {
      BitVec part = value.slice(bit, static_cast<int>(offs.size()));
      bit += static_cast<int>(offs.size());
      if (nonblocking)
        nba.push_back({s, offs, part});
      else
        commit(s, offs, part);
    }
  }

  void commit(size_t s, const std::vector<int>& offs, const BitVec& v) {
    BitVec& dst = sigs[s].value;
    for (size_t k = 0; k < offs.size(); ++k) {
      if (offs[k] < 0) continue;
      if (v.is_x(static_cast<int>(k)))
        dst.set_x(offs[k]);
      else
        dst.set_bit(offs[k], v.bit(static_cast<int>(k)));
    }
  }

  // ----------------------------------------------------------- statements

  bool case_match(const std::string& kw, const BitVec& subject, const BitVec& label) const {
    for (int i = 0; i < subject.width(); ++i) {
      bool lx = label.is_x(i), sx = subject.is_x(i);
      if (kw != "case" && lx) continue;
      if (kw == "casex" && sx) continue;
      if (lx != sx) return false;
      if (!lx && label.bit(i) != subject.bit(i)) return false;
    }
    return true;
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Null:
        return;
      case StmtKind::Block: {
        bool scoped = !s.decls.empty();
        if (scoped) scopes.push_back(local_slots.at(&s));
        for (const auto& c : s.stmts) exec(c);
        if (scoped) scopes.pop_back();
        return;
      }
      case StmtKind::Assign: {
        Evaluator ev = evaluator();
        BitVec v = ev.eval_sized(s.rhs, ev.self_width(s.cond));
        write(s.cond, v, s.nonblocking);
        return;
      }
      case StmtKind::If: {
        if (evaluator().eval(s.cond).any_one())
          exec(*s.then_stmt);
        else if (s.else_stmt)
          exec(*s.else_stmt);
        return;
      }
      case StmtKind::Case: {
        Evaluator ev = evaluator();
        int w = ev.self_width(s.cond);
        for (const auto& ci : s.items)
          for (const auto& l : ci.labels) w = std::max(w, ev.self_width(l));
        BitVec subject = ev.eval_sized(s.cond, w);
        const CaseItem* dflt = nullptr;
        for (const auto& ci : s.items) {
          if (ci.is_default) {
            dflt = &ci;
            continue;
          }
          for (const auto& l : ci.labels)
            if (case_match(s.case_keyword, subject, ev.eval_sized(l, w))) {
              exec(*ci.body);
              return;
            }
        }
        if (dflt) exec(*dflt->body);
        return;
      }
    }
  }

  // ---------------------------------------------------------- scheduling

  std::vector<BitVec> snapshot() const {
    std::vector<BitVec> out;
    out.reserve(sigs.size());
    for (const auto& s : sigs) out.push_back(s.value);
    return out;
  }

  bool same(const std::vector<BitVec>& snap) const {
    for (size_t i = 0; i < sigs.size(); ++i)
      if (!sigs[i].value.identical(snap[i])) return false;
    return true;
  }

  void settle() {
    for (int pass = 0; pass < kSettleLimit; ++pass) {
      auto before = snapshot();
      for (const auto& c : comb) {
        if (c.body) {
          exec(*c.body);
        } else {
          Evaluator ev = evaluator();
          write(*c.lhs, ev.eval_sized(*c.rhs, ev.self_width(*c.lhs)), false);
        }
      }
      // Stray nonblocking assignments in combinational blocks commit here.
      for (const auto& u : nba) commit(u.sig, u.offsets, u.value);
      nba.clear();
      if (same(before)) return;
    }
    throw UnsupportedConstruct("combinational logic does not settle");
  }

  std::vector<BitVec> event_values(const Always& al) const {
    std::vector<BitVec> out;
    Evaluator ev = evaluator();
    for (const auto& e : al.control.events) out.push_back(ev.eval(e.signal).slice(0, 1));
    return out;
  }

  static bool fired(Edge edge, const BitVec& before, const BitVec& now) {
    auto level = [](const BitVec& v) { return v.is_x(0) ? 2 : v.bit(0) ? 1 : 0; };
    int a = level(before), b = level(now);
    if (a == b) return false;
    if (edge == Edge::Posedge) return (a == 0 && b != 0) || (a == 2 && b == 1);
    return (a == 1 && b != 1) || (a == 2 && b == 0);
  }

  void step(const InputVector& in) {
    for (const auto& [name, v] : in) {
      auto f = index.find(name);
      if (f == index.end()) throw UnsupportedConstruct("unknown input '" + name + "'");
      sigs[f->second].value = v.resized(sigs[f->second].value.width());
    }
    for (int delta = 0; delta < kDeltaLimit; ++delta) {
      settle();
      std::vector<Seq*> run;
      for (auto& s : seq) {
        auto now = event_values(*s.al);
        bool any = false;
        for (size_t i = 0; i < now.size(); ++i)
          any = any || fired(s.al->control.events[i].edge, s.prev[i], now[i]);
        s.prev = now;
        if (any) run.push_back(&s);
      }
      if (run.empty()) return;
      for (Seq* s : run) exec(s->al->body);
      for (const auto& u : nba) commit(u.sig, u.offsets, u.value);
      nba.clear();
    }
    throw UnsupportedConstruct("clocked logic does not settle");
  }
};

Simulator::Simulator(const Ast& ast, const std::string& module) : impl_(std::make_unique<Impl>()) {
  const ModuleDecl* m = ast.find_module(module);
  if (!m) throw UnsupportedConstruct("no module named '" + module + "'");
  impl_->build(ast, *m);
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const std::vector<PortInfo>& Simulator::inputs() const { return impl_->in_ports; }
const std::vector<PortInfo>& Simulator::outputs() const { return impl_->out_ports; }
const std::vector<std::string>& Simulator::edge_inputs() const { return impl_->edge_ins; }
bool Simulator::is_sequential() const { return !impl_->seq.empty(); }

void Simulator::step(const InputVector& in) { impl_->step(in); }

OutputVector Simulator::outputs_now() const {
  OutputVector out;
  for (const auto& p : impl_->out_ports) out[p.name] = impl_->sigs[impl_->index.at(p.name)].value;
  return out;
}

BitVec Simulator::value(const std::string& name) const {
  auto f = impl_->index.find(name);
  if (f == impl_->index.end()) throw UnsupportedConstruct("unknown signal '" + name + "'");
  return impl_->sigs[f->second].value;
}

std::vector<OutputVector> simulate(const Ast& ast, const std::string& module,
                                   const std::vector<InputVector>& stimulus) {
  Simulator sim(ast, module);
  std::vector<OutputVector> trace;
  trace.reserve(stimulus.size());
  for (const auto& in : stimulus) {
    sim.step(in);
    trace.push_back(sim.outputs_now());
  }
  return trace;
}

}  // namespace rtlmark
