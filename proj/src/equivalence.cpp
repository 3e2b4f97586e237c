// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/equivalence.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <sstream>

#include "rtlmark/errors.hpp"
#include "rtlmark/sim.hpp"
#include "rtlmark/verilog/symbols.hpp"
#include "rtlmark/verilog/visit.hpp"

namespace rtlmark {

using namespace vlog;

std::string EquivalenceVerdict::to_string() const {
  switch (kind) {
    case Kind::EquivalentExhaustive: return "equivalent-exhaustive";
    case Kind::EquivalentSampled: return "equivalent-sampled(" + std::to_string(vectors) + ")";
    default: return "inequivalent(" + counterexample + ")";
  }
}

namespace {

BitVec random_bits(std::mt19937_64& rng, int width) {
  BitVec v(width);
  for (int i = 0; i < width; i += 64) {
    uint64_t r = rng();
    for (int k = 0; k < 64 && i + k < width; ++k) v.set_bit(i + k, (r >> k) & 1);
  }
  return v;
}

std::string describe(const InputVector& in) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [n, v] : in) {
    os << (first ? "" : ", ") << n << "=" << v.width() << "'b" << v.to_binary();
    first = false;
  }
  return os.str();
}

struct ResetInput {
  std::string name;
  bool active_high;
};

struct Plan {
  std::vector<PortInfo> data;  // randomized inputs
  std::vector<ResetInput> resets;
  std::vector<std::pair<std::string, bool>> clocks;  // name, posedge
};

bool looks_like_reset(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), ::tolower);
  return n.find("rst") != std::string::npos || n.find("reset") != std::string::npos;
}

bool active_low_name(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), ::tolower);
  return n.size() > 1 && n.back() == 'n' && (n.find("_n") == n.size() - 2 || n.find("rstn") != std::string::npos ||
                                             n.find("resetn") != std::string::npos);
}

Plan classify(const Ast& ast, const ModuleDecl& m, const Simulator& sim,
              const std::set<std::string>& shared) {
  Plan p;
  ModuleSymbols syms = resolve_module(ast, m);
  std::map<std::string, std::pair<size_t, Edge>> event_refs;
  for (const auto& it : m.items)
    if (auto* al = it.as<Always>(); al && al->control.has_edges())
      for (const auto& ev : al->control.events)
        visit_expr(ev.signal, [&](const Expr& x) {
          if (x.is_ident()) {
            auto& e = event_refs[x.text];
            ++e.first;
            e.second = ev.edge;
          }
        });
  std::set<std::string> edge(sim.edge_inputs().begin(), sim.edge_inputs().end());
  for (const auto& in : sim.inputs()) {
    if (!shared.count(in.name)) continue;
    if (edge.count(in.name)) {
      const Symbol* s = syms.find(in.name);
      auto [count, kind] = event_refs[in.name];
      bool read_elsewhere = s && s->uses.size() > count;
      if (read_elsewhere)
        p.resets.push_back({in.name, kind == Edge::Posedge});
      else
        p.clocks.push_back({in.name, kind == Edge::Posedge});
    } else if (in.width == 1 && looks_like_reset(in.name)) {
      p.resets.push_back({in.name, !active_low_name(in.name)});
    } else {
      p.data.push_back(in);
    }
  }
  return p;
}

class Harness {
 public:
  Harness(const Ast& a, const Ast& b, const std::string& module)
      : sa_(a, module), sb_(b, module), name_(module) {}

  Simulator& a() { return sa_; }
  Simulator& b() { return sb_; }

  // Returns a counterexample description, or empty on agreement.
  std::string step(InputVector in) {
    ++steps_;
    InputVector ia = in, ib = in;
    if (first_) {
      for (const auto& p : sa_.inputs())
        if (!in.count(p.name)) ia[p.name] = BitVec(p.width, 0);
      for (const auto& p : sb_.inputs())
        if (!in.count(p.name)) ib[p.name] = BitVec(p.width, 0);
      first_ = false;
    }
    sa_.step(ia);
    sb_.step(ib);
    auto oa = sa_.outputs_now();
    auto ob = sb_.outputs_now();
    for (const auto& [n, va] : oa) {
      const BitVec& vb = ob.at(n);
      for (int i = 0; i < va.width(); ++i) {
        if (va.is_x(i) || vb.is_x(i) || va.bit(i) == vb.bit(i)) continue;
        history_.push_back(in);
        return "module " + name_ + ", step " + std::to_string(steps_) + ", inputs {" +
               describe(in) + "}: output " + n + " = " + va.to_binary() + " vs " + vb.to_binary();
      }
    }
    return {};
  }

 private:
  Simulator sa_, sb_;
  std::string name_;
  bool first_ = true;
  size_t steps_ = 0;
  std::vector<InputVector> history_;
};

std::string port_mismatch(const Simulator& a, const Simulator& b) {
  auto key = [](const std::vector<PortInfo>& ps) {
    std::map<std::string, int> out;
    for (const auto& p : ps) out[p.name] = p.width;
    return out;
  };
  if (key(a.outputs()) != key(b.outputs())) return "output ports differ";
  auto ia = key(a.inputs()), ib = key(b.inputs());
  for (const auto& [n, w] : ia)
    if (ib.count(n) && ib[n] != w) return "input '" + n + "' width differs";
  return {};
}

EquivalenceVerdict check_module(const Ast& a, const Ast& b, const ModuleDecl& m,
                                const EquivalenceBudget& budget) {
  using K = EquivalenceVerdict::Kind;
  Harness h(a, b, m.name);
  if (auto msg = port_mismatch(h.a(), h.b()); !msg.empty()) return {K::Inequivalent, 0, m.name + ": " + msg};

  std::set<std::string> shared;
  std::set<std::string> in_b;
  for (const auto& p : h.b().inputs()) in_b.insert(p.name);
  for (const auto& p : h.a().inputs())
    if (in_b.count(p.name)) shared.insert(p.name);

  std::mt19937_64 rng(budget.seed);
  bool sequential = h.a().is_sequential() || h.b().is_sequential();
  Plan plan = classify(a, m, h.a(), shared);
  int total_bits = 0;
  for (const auto& p : plan.data) total_bits += p.width;
  for (const auto& r : plan.resets) total_bits += 1, plan.data.push_back({r.name, 1, Direction::Input});
  if (!sequential) plan.resets.clear();
  else plan.data.erase(std::remove_if(plan.data.begin(), plan.data.end(),
                                      [&](const PortInfo& p) {
                                        return std::any_of(plan.resets.begin(), plan.resets.end(),
                                                           [&](const ResetInput& r) { return r.name == p.name; });
                                      }),
                       plan.data.end());

  auto data_vector = [&](auto&& bit_of) {
    InputVector in;
    int offset = 0;
    for (const auto& p : plan.data) {
      BitVec v(p.width);
      for (int i = 0; i < p.width; ++i) v.set_bit(i, bit_of(offset + i));
      in[p.name] = v;
      offset += p.width;
    }
    return in;
  };
  int data_bits = 0;
  for (const auto& p : plan.data) data_bits += p.width;

  std::vector<InputVector> corners;
  corners.push_back(data_vector([](int) { return false; }));
  corners.push_back(data_vector([](int) { return true; }));
  for (int k = 0; k < data_bits; ++k) corners.push_back(data_vector([k](int i) { return i == k; }));
  auto random_vector = [&] {
    InputVector in;
    for (const auto& p : plan.data) in[p.name] = random_bits(rng, p.width);
    return in;
  };

  if (!sequential) {
    if (total_bits <= budget.exhaustive_bits) {
      for (uint64_t v = 0; v < (uint64_t{1} << total_bits); ++v) {
        auto in = data_vector([v](int i) { return (v >> i) & 1; });
        if (auto cx = h.step(in); !cx.empty()) return {K::Inequivalent, 0, cx};
      }
      return {K::EquivalentExhaustive, size_t{1} << total_bits, {}};
    }
    for (const auto& in : corners)
      if (auto cx = h.step(in); !cx.empty()) return {K::Inequivalent, 0, cx};
    for (int n = 0; n < budget.random_vectors; ++n)
      if (auto cx = h.step(random_vector()); !cx.empty()) return {K::Inequivalent, 0, cx};
    return {K::EquivalentSampled, static_cast<size_t>(budget.random_vectors), {}};
  }

  // One clock cycle: data settles with clocks idle, then the active edge.
  auto cycle = [&](InputVector in, bool reset_active) -> std::string {
    for (const auto& r : plan.resets) in[r.name] = BitVec(1, reset_active == r.active_high);
    for (const auto& [c, pos] : plan.clocks) in[c] = BitVec(1, !pos);
    if (auto cx = h.step(in); !cx.empty()) return cx;
    InputVector edge;
    for (const auto& [c, pos] : plan.clocks) edge[c] = BitVec(1, pos);
    return h.step(edge);
  };
  for (int i = 0; i < 2; ++i)
    if (auto cx = cycle(random_vector(), true); !cx.empty()) return {K::Inequivalent, 0, cx};
  for (const auto& in : corners)
    if (auto cx = cycle(in, false); !cx.empty()) return {K::Inequivalent, 0, cx};
  std::uniform_int_distribution<int> reset_draw(0, 31);
  for (int n = 0; n < budget.sequential_cycles; ++n) {
    bool rst = !plan.resets.empty() && reset_draw(rng) == 0;
    if (auto cx = cycle(random_vector(), rst); !cx.empty()) return {K::Inequivalent, 0, cx};
  }
  return {K::EquivalentSampled, static_cast<size_t>(budget.sequential_cycles), {}};
}

}  // namespace

EquivalenceVerdict check_equivalence(const Ast& a, const Ast& b, const EquivalenceBudget& budget) {
  using K = EquivalenceVerdict::Kind;
  EquivalenceVerdict worst{K::EquivalentExhaustive, 0, {}};
  std::set<std::string> names;
  for (const auto& m : a.modules) names.insert(m.name);
  for (const auto& m : b.modules)
    if (!names.count(m.name)) return {K::Inequivalent, 0, "module " + m.name + " missing on one side"};
  for (const auto& m : a.modules) {
    if (!b.find_module(m.name)) return {K::Inequivalent, 0, "module " + m.name + " missing on one side"};
    EquivalenceVerdict v = check_module(a, b, m, budget);
    if (!v.equivalent()) return v;
    if (v.kind == K::EquivalentSampled) {
      worst.kind = K::EquivalentSampled;
      worst.vectors = std::max(worst.vectors, v.vectors);
    } else if (worst.kind == K::EquivalentExhaustive) {
      worst.vectors += v.vectors;
    }
  }
  return worst;
}

}  // namespace rtlmark
