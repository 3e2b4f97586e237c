// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "rtlmark/errors.hpp"
#include "rtlmark/verilog/lexer.hpp"

namespace rtlmark {

using namespace vlog;

const NetlistPort* NetlistGraph::port(const std::string& name) const {
  for (const auto& p : ports)
    if (p.name == name) return &p;
  return nullptr;
}

// ------------------------------------------------------------------ parsing

namespace {

enum class Tok { Ident, Number, Punct, End };

struct NTok {
  Tok kind;
  std::string text;
  size_t offset;
};

class NetLexer {
 public:
  NetLexer(const std::string& s, std::string origin) : s_(s), origin_(std::move(origin)) {}

  std::vector<NTok> run() {
    std::vector<NTok> out;
    for (;;) {
      skip();
      if (i_ >= s_.size()) break;
      size_t b = i_;
      char c = s_[i_];
      if (c == '\\') {
        ++i_;
        while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        out.push_back({Tok::Ident, s_.substr(b + 1, i_ - b - 1), b});
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '$')) ++i_;
        out.push_back({Tok::Ident, s_.substr(b, i_ - b), b});
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '\'' || s_[i_] == '_' ||
                                  s_[i_] == '?'))
          ++i_;
        out.push_back({Tok::Number, s_.substr(b, i_ - b), b});
      } else {
        ++i_;
        out.push_back({Tok::Punct, std::string(1, c), b});
      }
    }
    out.push_back({Tok::End, "", s_.size()});
    return out;
  }

  [[noreturn]] void fail(size_t at, const std::string& msg) const {
    throw ParseError(origin_, position_of(s_, at), msg);
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_.compare(i_, 2, "//") == 0) {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else if (s_.compare(i_, 2, "/*") == 0) {
        size_t e = s_.find("*/", i_ + 2);
        if (e == std::string::npos) fail(i_, "unterminated comment");
        i_ = e + 2;
      } else if (s_.compare(i_, 2, "(*") == 0) {
        size_t e = s_.find("*)", i_ + 2);
        if (e == std::string::npos) fail(i_, "unterminated attribute");
        i_ = e + 2;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::string origin_;
  size_t i_ = 0;
};

struct RawModule {
  std::string name;
  std::vector<std::string> port_order;
  std::map<std::string, std::pair<int, int>> ranges;  // msb, lsb
  std::map<std::string, Direction> dirs;
  struct RawCell {
    std::string type, name;
    std::vector<std::pair<std::string, size_t>> pins;  // pin, token index of expression
  };
  std::vector<RawCell> cells;
  std::vector<std::pair<size_t, size_t>> assigns;  // token indices of lhs and rhs
  std::vector<std::pair<std::string, size_t>> decl_assigns;  // "wire n = rhs;"
};

class NetParser {
 public:
  NetParser(const SourceText& src) : lex_(src.content, src.origin), toks_(lex_.run()) {}

  std::vector<RawModule> modules() {
    std::vector<RawModule> out;
    while (peek().kind != Tok::End) {
      if (is("module")) out.push_back(module());
      else fail("expected 'module'");
    }
    return out;
  }

  // Bits of the expression starting at token `at`, LSB first.
  std::vector<NetBit> bits_at(size_t at, const std::function<std::vector<NetBit>(const std::string&)>& net,
                              const std::function<NetBit(const std::string&, int)>& bit) {
    size_t save = i_;
    i_ = at;
    auto v = expr(net, bit);
    i_ = save;
    return v;
  }

 private:
  const NTok& peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool is(const char* t) const { return peek().text == t && peek().kind != Tok::End; }
  NTok take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
  [[noreturn]] void fail(const std::string& msg) const { lex_.fail(peek().offset, msg + ", got '" + peek().text + "'"); }
  void expect(const char* t) {
    if (!is(t)) fail(std::string("expected '") + t + "'");
    ++i_;
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return take().text;
  }
  int integer() {
    if (peek().kind != Tok::Number) fail("expected number");
    return std::stoi(take().text);
  }
  // Skips a balanced expression up to a separator at depth 0.
  void skip_expr() {
    int depth = 0;
    for (;;) {
      const auto& t = peek();
      if (t.kind == Tok::End) fail("unexpected end of input");
      if (depth == 0 && (t.text == "," || t.text == ")" || t.text == ";" || t.text == "=")) return;
      if (t.text == "(" || t.text == "{" || t.text == "[") ++depth;
      if (t.text == ")" || t.text == "}" || t.text == "]") --depth;
      ++i_;
    }
  }

  RawModule module() {
    RawModule m;
    expect("module");
    m.name = ident();
    if (is("(")) {
      ++i_;
      while (!is(")")) {
        m.port_order.push_back(ident());
        if (is(",")) ++i_;
      }
      ++i_;
    }
    expect(";");
    while (!is("endmodule")) {
      if (peek().kind == Tok::End) fail("missing 'endmodule'");
      if (is("input") || is("output") || is("inout") || is("wire") || is("reg")) {
        std::string kw = take().text;
        if (is("signed")) ++i_;
        std::pair<int, int> r{0, 0};
        if (is("[")) {
          ++i_;
          r.first = integer();
          expect(":");
          r.second = integer();
          expect("]");
        }
        for (;;) {
          std::string n = ident();
          m.ranges[n] = r;
          if (kw == "input") m.dirs[n] = Direction::Input;
          if (kw == "output") m.dirs[n] = Direction::Output;
          if (kw == "inout") m.dirs[n] = Direction::Inout;
          if (is("=")) {
            ++i_;
            size_t rhs = i_;
            skip_expr();
            m.decl_assigns.push_back({n, rhs});
          }
          if (!is(",")) break;
          ++i_;
        }
        expect(";");
      } else if (is("assign")) {
        ++i_;
        size_t lhs = i_;
        skip_expr();
        expect("=");
        size_t rhs = i_;
        skip_expr();
        expect(";");
        m.assigns.push_back({lhs, rhs});
      } else if (peek().kind == Tok::Ident) {
        RawModule::RawCell c;
        c.type = take().text;
        if (is("#")) {
          ++i_;
          expect("(");
          int depth = 1;
          while (depth > 0) {
            if (peek().kind == Tok::End) fail("unbalanced parameter list");
            if (is("(")) ++depth;
            if (is(")")) --depth;
            ++i_;
          }
        }
        c.name = ident();
        expect("(");
        while (!is(")")) {
          expect(".");
          std::string pin = ident();
          expect("(");
          size_t at = i_;
          if (!is(")")) skip_expr();
          expect(")");
          c.pins.push_back({pin, at});
          if (is(",")) ++i_;
        }
        ++i_;
        expect(";");
        m.cells.push_back(std::move(c));
      } else {
        fail("unsupported netlist construct");
      }
    }
    ++i_;
    return m;
  }

  std::vector<NetBit> expr(const std::function<std::vector<NetBit>(const std::string&)>& net,
                           const std::function<NetBit(const std::string&, int)>& bit) {
    if (is("{")) {
      ++i_;
      std::vector<NetBit> msb_first;
      while (!is("}")) {
        auto part = expr(net, bit);
        msb_first.insert(msb_first.end(), part.rbegin(), part.rend());
        if (is(",")) ++i_;
      }
      ++i_;
      return {msb_first.rbegin(), msb_first.rend()};
    }
    if (peek().kind == Tok::Number) return constant(take());
    std::string n = ident();
    if (is("[")) {
      ++i_;
      int a = integer();
      if (is(":")) {
        ++i_;
        int b = integer();
        expect("]");
        std::vector<NetBit> out;
        int step = a >= b ? 1 : -1;
        for (int k = b;; k += step) {
          out.push_back(bit(n, k));
          if (k == a) break;
        }
        return out;
      }
      expect("]");
      return {bit(n, a)};
    }
    return net(n);
  }

  std::vector<NetBit> constant(const NTok& t) {
    const std::string& s = t.text;
    size_t q = s.find('\'');
    if (q == std::string::npos) {
      uint64_t v = std::stoull(s);
      std::vector<NetBit> out(32);
      for (int k = 0; k < 32; ++k) out[k] = (v >> k) & 1 ? kConst1 : kConst0;
      return out;
    }
    int width = q == 0 ? 32 : std::stoi(s.substr(0, q));
    char base = static_cast<char>(std::tolower(static_cast<unsigned char>(s[q + 1])));
    std::string digits;
    for (char c : s.substr(q + 2))
      if (c != '_') digits += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    int per = base == 'b' ? 1 : base == 'o' ? 3 : base == 'h' ? 4 : 0;
    std::vector<NetBit> out(static_cast<size_t>(width), kConst0);
    if (per == 0) {
      uint64_t v = std::stoull(digits);
      for (int k = 0; k < width && k < 64; ++k) out[k] = (v >> k) & 1 ? kConst1 : kConst0;
      return out;
    }
    int pos = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      char c = *it;
      for (int k = 0; k < per && pos < width; ++k, ++pos) {
        if (c == 'x' || c == 'z' || c == '?') {
          out[pos] = kConstX;
        } else {
          int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
          out[pos] = (d >> k) & 1 ? kConst1 : kConst0;
        }
      }
    }
    return out;
  }

  NetLexer lex_;
  std::vector<NTok> toks_;
  size_t i_ = 0;
};

}  // namespace

NetlistGraph parse_netlist(const SourceText& text, const std::string& top) {
  NetParser p(text);
  auto mods = p.modules();
  if (mods.empty()) throw ParseError(text.origin, {}, "netlist has no modules");
  const RawModule* m = &mods.back();
  if (!top.empty()) {
    auto it = std::find_if(mods.begin(), mods.end(), [&](const RawModule& r) { return r.name == top; });
    if (it == mods.end()) throw ParseError(text.origin, {}, "netlist has no module '" + top + "'");
    m = &*it;
  }

  NetlistGraph g;
  g.module = m->name;
  g.bit_names = {"1'b0", "1'b1", "1'bx"};
  std::map<std::string, int> lsb_of;
  for (const auto& [n, r] : m->ranges) {
    int lo = std::min(r.first, r.second), hi = std::max(r.first, r.second);
    bool vector = r.first != 0 || r.second != 0;
    std::vector<NetBit> bits;
    for (int k = lo; k <= hi; ++k) {
      bits.push_back(static_cast<NetBit>(g.bit_names.size()));
      g.bit_names.push_back(vector ? n + "[" + std::to_string(k) + "]" : n);
    }
    g.nets[n] = bits;
    lsb_of[n] = lo;
  }
  auto undeclared = [&](const std::string& n) -> std::vector<NetBit>& {
    auto& v = g.nets[n];
    if (v.empty()) {
      v.push_back(static_cast<NetBit>(g.bit_names.size()));
      g.bit_names.push_back(n);
      lsb_of[n] = 0;
    }
    return v;
  };
  auto net = [&](const std::string& n) { return undeclared(n); };
  auto bit = [&](const std::string& n, int k) -> NetBit {
    auto& v = undeclared(n);
    int idx = k - lsb_of[n];
    if (idx < 0 || idx >= static_cast<int>(v.size())) return kConstX;
    return v[static_cast<size_t>(idx)];
  };

  for (const auto& n : m->port_order) {
    NetlistPort port;
    port.name = n;
    auto d = m->dirs.find(n);
    port.dir = d == m->dirs.end() ? Direction::Input : d->second;
    port.bits = net(n);
    g.ports.push_back(std::move(port));
  }
  for (const auto& c : m->cells) {
    NetlistCell cell;
    cell.type = c.type;
    cell.name = c.name;
    for (const auto& [pin, at] : c.pins) {
      auto bits = p.bits_at(at, net, bit);
      cell.pins[pin] = bits.empty() ? kConstX : bits[0];
    }
    g.cells.push_back(std::move(cell));
  }
  std::vector<std::pair<std::vector<NetBit>, size_t>> drives;
  for (const auto& [lhs_at, rhs_at] : m->assigns) drives.push_back({p.bits_at(lhs_at, net, bit), rhs_at});
  for (const auto& [n, rhs_at] : m->decl_assigns) drives.push_back({net(n), rhs_at});
  for (const auto& [lhs, rhs_at] : drives) {
    auto rhs = p.bits_at(rhs_at, net, bit);
    for (size_t k = 0; k < lhs.size(); ++k) {
      NetlistCell buf;
      buf.type = "$_BUF_";
      buf.name = "assign:" + g.bit_names[static_cast<size_t>(lhs[k])];
      buf.pins["A"] = k < rhs.size() ? rhs[k] : kConst0;
      buf.pins["Y"] = lhs[k];
      g.cells.push_back(std::move(buf));
    }
  }
  return g;
}

// ------------------------------------------------------------------ tracing

namespace {

using Lanes = uint64_t;

struct FlopSpec {
  bool is_flop = false;
  // Each control is (pin, polarity char); empty pin when absent.
  std::string reset_pin, set_pin, enable_pin;
  char reset_pol = 'P', set_pol = 'P', enable_pol = 'P';
  int reset_value = 0;
  bool enable_over_reset = false;  // $_SDFFCE_: reset only acts when enabled
};

FlopSpec flop_spec(const std::string& type) {
  FlopSpec f;
  auto suffix = [&](const std::string& prefix) -> std::optional<std::string> {
    if (type.rfind(prefix, 0) != 0 || type.back() != '_') return std::nullopt;
    return type.substr(prefix.size(), type.size() - prefix.size() - 1);
  };
  if (auto s = suffix("$_SDFFCE_"); s && s->size() == 4) {
    f = {true, "R", "", "E", (*s)[1], 'P', (*s)[3], (*s)[2] - '0', true};
  } else if (auto s2 = suffix("$_SDFFE_"); s2 && s2->size() == 4) {
    f = {true, "R", "", "E", (*s2)[1], 'P', (*s2)[3], (*s2)[2] - '0', false};
  } else if (auto s3 = suffix("$_SDFF_"); s3 && s3->size() == 3) {
    f = {true, "R", "", "", (*s3)[1], 'P', 'P', (*s3)[2] - '0', false};
  } else if (auto s4 = suffix("$_DFFSRE_"); s4 && s4->size() == 4) {
    f = {true, "R", "S", "E", (*s4)[2], (*s4)[1], (*s4)[3], 0, false};
  } else if (auto s5 = suffix("$_DFFSR_"); s5 && s5->size() == 3) {
    f = {true, "R", "S", "", (*s5)[2], (*s5)[1], 'P', 0, false};
  } else if (auto s6 = suffix("$_DFFE_"); s6 && s6->size() == 4) {
    f = {true, "R", "", "E", (*s6)[1], 'P', (*s6)[3], (*s6)[2] - '0', false};
  } else if (auto s7 = suffix("$_DFFE_"); s7 && s7->size() == 2) {
    f = {true, "", "", "E", 'P', 'P', (*s7)[1], 0, false};
  } else if (auto s8 = suffix("$_DFF_"); s8 && s8->size() == 3) {
    f = {true, "R", "", "", (*s8)[1], 'P', 'P', (*s8)[2] - '0', false};
  } else if (auto s9 = suffix("$_DFF_"); s9 && s9->size() == 1) {
    f = {true, "", "", "", 'P', 'P', 'P', 0, false};
  } else if (auto sa = suffix("$_DLATCH_"); sa && sa->size() == 1) {
    f = {true, "", "", "E", 'P', 'P', (*sa)[0], 0, false};
  } else if (auto sb = suffix("$_DLATCH_"); sb && sb->size() == 3) {
    f = {true, "R", "", "E", (*sb)[1], 'P', (*sb)[0], (*sb)[2] - '0', false};
  }
  return f;
}

Lanes polar(Lanes v, char pol) { return pol == 'P' ? v : ~v; }

// Evaluates a combinational cell; nullopt for unknown types.
std::optional<Lanes> eval_gate(const std::string& t, const std::function<Lanes(const char*)>& in) {
  if (t == "$_BUF_") return in("A");
  if (t == "$_NOT_") return ~in("A");
  if (t == "$_AND_") return in("A") & in("B");
  if (t == "$_NAND_") return ~(in("A") & in("B"));
  if (t == "$_OR_") return in("A") | in("B");
  if (t == "$_NOR_") return ~(in("A") | in("B"));
  if (t == "$_XOR_") return in("A") ^ in("B");
  if (t == "$_XNOR_") return ~(in("A") ^ in("B"));
  if (t == "$_ANDNOT_") return in("A") & ~in("B");
  if (t == "$_ORNOT_") return in("A") | ~in("B");
  if (t == "$_MUX_") return (in("S") & in("B")) | (~in("S") & in("A"));
  if (t == "$_NMUX_") return ~((in("S") & in("B")) | (~in("S") & in("A")));
  if (t == "$_AOI3_") return ~((in("A") & in("B")) | in("C"));
  if (t == "$_OAI3_") return ~((in("A") | in("B")) & in("C"));
  if (t == "$_AOI4_") return ~((in("A") & in("B")) | (in("C") & in("D")));
  if (t == "$_OAI4_") return ~((in("A") | in("B")) & (in("C") | in("D")));
  return std::nullopt;
}

const char* kGateInputs[] = {"A", "B", "C", "D", "S"};

class Tracer {
 public:
  explicit Tracer(const NetlistGraph& g) : g_(g) {
    for (size_t i = 0; i < g.cells.size(); ++i) {
      const auto& c = g.cells[i];
      FlopSpec f = flop_spec(c.type);
      specs_.push_back(f);
      const char* out = f.is_flop ? "Q" : "Y";
      if (auto it = c.pins.find(out); it != c.pins.end()) driver_[it->second] = i;
    }
  }

  // Follows buffer aliases back to the bit that actually holds the value.
  NetBit resolve(NetBit b) const {
    for (int guard = 0; guard < 1 << 16; ++guard) {
      auto d = driver_.find(b);
      if (d == driver_.end() || g_.cells[d->second].type != "$_BUF_") break;
      b = g_.cells[d->second].pins.at("A");
    }
    return b;
  }

  // Next-state inputs of a group bit: the flop's data/control pins, or the bit itself.
  std::vector<NetBit> roots(NetBit b) const {
    b = resolve(b);
    auto d = driver_.find(b);
    if (d == driver_.end() || !specs_[d->second].is_flop) return {b};
    std::vector<NetBit> r;
    bool holds = !specs_[d->second].enable_pin.empty();  // Q only feeds back through an enable
    for (const auto& [pin, net] : g_.cells[d->second].pins)
      if (pin != "C" && pin != "CLK" && (pin != "Q" || holds)) r.push_back(net);
    return r;
  }

  bool is_comb(NetBit b) const {
    auto d = driver_.find(b);
    if (d == driver_.end()) return false;
    const auto& c = g_.cells[d->second];
    return !specs_[d->second].is_flop && eval_gate(c.type, [](const char*) { return Lanes{0}; }).has_value();
  }

  // Comb cells in topological order and the leaf bits of the cone.
  void cone(const std::vector<NetBit>& roots, std::vector<size_t>& order, std::vector<NetBit>& leaves) const {
    std::set<NetBit> seen;
    std::set<NetBit> leaf_set;
    std::function<void(NetBit)> visit = [&](NetBit b) {
      if (b <= kConstX || !seen.insert(b).second) return;
      if (!is_comb(b)) {
        leaf_set.insert(b);
        return;
      }
      size_t ci = driver_.at(b);
      for (const char* pin : kGateInputs)
        if (auto it = g_.cells[ci].pins.find(pin); it != g_.cells[ci].pins.end()) visit(it->second);
      order.push_back(ci);
    };
    for (NetBit r : roots) visit(r);
    leaves.assign(leaf_set.begin(), leaf_set.end());
  }

  // Next value of group bit `b` given evaluated lanes.
  Lanes next_value(NetBit b, const std::unordered_map<NetBit, Lanes>& v) const {
    auto get = [&](NetBit n) -> Lanes {
      if (n == kConst1) return ~Lanes{0};
      if (n <= kConstX) return 0;
      auto it = v.find(n);
      return it == v.end() ? 0 : it->second;
    };
    b = resolve(b);
    auto d = driver_.find(b);
    if (d == driver_.end() || !specs_[d->second].is_flop) return get(b);
    const auto& c = g_.cells[d->second];
    const FlopSpec& f = specs_[d->second];
    auto pin = [&](const std::string& p) { return get(c.pins.at(p)); };
    Lanes q = c.pins.count("Q") ? pin("Q") : 0;
    Lanes next = pin("D");
    Lanes en = f.enable_pin.empty() ? ~Lanes{0} : polar(pin(f.enable_pin), f.enable_pol);
    Lanes rst = f.reset_pin.empty() ? 0 : polar(pin(f.reset_pin), f.reset_pol);
    Lanes set = f.set_pin.empty() ? 0 : polar(pin(f.set_pin), f.set_pol);
    Lanes rval = f.reset_value ? ~Lanes{0} : 0;
    if (f.enable_over_reset) {
      next = (rst & rval) | (~rst & next);
      return (en & next) | (~en & q);
    }
    next = (en & next) | (~en & q);
    next = (set & ~Lanes{0}) | (~set & next);
    return (rst & rval) | (~rst & next);
  }

  std::vector<std::string> cell_names(const std::vector<size_t>& order, const std::vector<NetBit>& group) const {
    std::vector<std::string> out;
    for (NetBit b : group)
      if (auto d = driver_.find(resolve(b)); d != driver_.end() && specs_[d->second].is_flop)
        out.push_back(g_.cells[d->second].name);
    for (size_t ci : order) out.push_back(g_.cells[ci].name);
    return out;
  }

  const NetlistGraph& g_;
  std::vector<FlopSpec> specs_;
  std::unordered_map<NetBit, size_t> driver_;
};

}  // namespace

namespace {

constexpr Lanes kPattern[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                               0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};

constexpr uint8_t kX = 2;

// Lanes of a small function whose unknown inputs took kPattern[0..nx).
uint8_t collapse(Lanes r, int nx) {
  Lanes mask = nx >= 6 ? ~Lanes{0} : (Lanes{1} << (1 << nx)) - 1;
  r &= mask;
  if (r == 0) return 0;
  if (r == mask) return 1;
  return kX;
}

using Fixed = std::map<NetBit, uint8_t>;

class Prover {
 public:
  Prover(const NetlistGraph& g, const Tracer& tr, int max_inputs) : g_(g), tr_(tr), max_(max_inputs) {}

  // Per-bit value of the group's next state under `fixed`: 0, 1 or kX when
  // ternary propagation cannot decide.
  std::vector<uint8_t> ternary(const std::vector<NetBit>& group, const Fixed& fixed) const {
    std::vector<NetBit> roots;
    for (NetBit b : group)
      for (NetBit r : tr_.roots(b)) roots.push_back(r);
    std::vector<size_t> order;
    std::vector<NetBit> leaves;
    tr_.cone(roots, order, leaves);
    std::unordered_map<NetBit, uint8_t> t;
    for (NetBit l : leaves) t[l] = fixed.count(l) ? fixed.at(l) : kX;
    auto val = [&](NetBit n) -> uint8_t {
      if (n == kConst0) return 0;
      if (n == kConst1) return 1;
      if (n == kConstX) return kX;
      auto it = t.find(n);
      return it == t.end() ? kX : it->second;
    };
    for (size_t ci : order) {
      const auto& cell = g_.cells[ci];
      int nx = 0;
      std::map<std::string, Lanes> in;
      for (const char* pin : kGateInputs) {
        auto it = cell.pins.find(pin);
        if (it == cell.pins.end()) continue;
        uint8_t x = val(it->second);
        in[pin] = x == kX ? kPattern[nx++] : (x ? ~Lanes{0} : 0);
      }
      Lanes r = *eval_gate(cell.type, [&](const char* p) { return in.at(p); });
      t[cell.pins.at("Y")] = collapse(r, nx);
    }
    std::vector<uint8_t> out;
    for (NetBit b : group) {
      // Distinct unknown nets feeding the next-state function get their own pattern.
      std::unordered_map<NetBit, Lanes> v;
      int nx = 0;
      for (NetBit r : tr_.roots(b)) {
        if (v.count(r) || r <= kConstX) continue;
        uint8_t x = val(r);
        v[r] = x == kX ? kPattern[nx++] : (x ? ~Lanes{0} : 0);
      }
      bool unknown_const = false;
      for (NetBit r : tr_.roots(b)) unknown_const |= r == kConstX;
      out.push_back(unknown_const || nx > 6 ? kX : collapse(tr_.next_value(b, v), nx));
    }
    return out;
  }

  // Exhaustive check of one bit over its own cone. nullopt when the value
  // depends on the free inputs or the cone exceeds the bound.
  std::optional<uint8_t> exhaustive(NetBit b, const Fixed& fixed, bool& too_large) const {
    std::vector<size_t> order;
    std::vector<NetBit> leaves;
    tr_.cone(tr_.roots(b), order, leaves);
    std::vector<NetBit> free;
    for (NetBit l : leaves)
      if (!fixed.count(l)) free.push_back(l);
    if (static_cast<int>(free.size()) > max_) {
      too_large = true;
      return std::nullopt;
    }
    const uint64_t total = uint64_t{1} << free.size();
    const uint64_t blocks = std::max<uint64_t>(1, total >> 6);
    const Lanes mask = total >= 64 ? ~Lanes{0} : (Lanes{1} << total) - 1;
    std::optional<uint8_t> seen;
    std::unordered_map<NetBit, Lanes> v;
    for (uint64_t blk = 0; blk < blocks; ++blk) {
      v.clear();
      for (const auto& [n, x] : fixed) v[n] = x ? ~Lanes{0} : 0;
      for (size_t k = 0; k < free.size(); ++k)
        v[free[k]] = k < 6 ? kPattern[k] : (((blk >> (k - 6)) & 1) ? ~Lanes{0} : 0);
      for (size_t ci : order) {
        const auto& cell = g_.cells[ci];
        auto in = [&](const char* pin) -> Lanes {
          NetBit n = cell.pins.at(pin);
          if (n == kConst1) return ~Lanes{0};
          if (n <= kConstX) return 0;
          auto it = v.find(n);
          return it == v.end() ? 0 : it->second;
        };
        v[cell.pins.at("Y")] = *eval_gate(cell.type, in);
      }
      Lanes r = tr_.next_value(b, v) & mask;
      uint8_t x = r == 0 ? 0 : r == mask ? 1 : kX;
      if (x == kX || (seen && *seen != x)) return std::nullopt;
      seen = x;
    }
    return seen;
  }

  // The group's constant next state under `fixed`, or nullopt.
  std::optional<std::vector<uint8_t>> constant(const std::vector<NetBit>& group, const Fixed& fixed,
                                               bool& too_large) const {
    auto bits = ternary(group, fixed);
    for (size_t k = 0; k < bits.size(); ++k) {
      if (bits[k] != kX) continue;
      auto x = exhaustive(group[k], fixed, too_large);
      if (!x) return std::nullopt;
      bits[k] = *x;
    }
    return bits;
  }

 private:
  const NetlistGraph& g_;
  const Tracer& tr_;
  int max_;
};

Bytes pack(const std::vector<uint8_t>& bits) {
  Bytes val((bits.size() + 7) / 8, 0);
  for (size_t k = 0; k < bits.size(); ++k)
    if (bits[k]) val[k / 8] |= static_cast<uint8_t>(1u << (k % 8));
  return val;
}

}  // namespace

NetlistEvidence trace_watermark(const NetlistGraph& g, const WatermarkKey& key, int expected_width,
                                int max_cone_inputs) {
  NetlistEvidence ev;
  Tracer tr(g);
  Prover prover(g, tr, max_cone_inputs);
  std::vector<const NetlistPort*> controls, groups;
  for (const auto& p : g.ports) {
    if (p.dir == Direction::Input && p.bits.size() == 1) controls.push_back(&p);
    int w = static_cast<int>(p.bits.size());
    if (p.dir == Direction::Output && (expected_width ? w == expected_width : w >= 8)) groups.push_back(&p);
  }

  struct Attempt {
    const NetlistPort* ctl;
    const NetlistPort* held = nullptr;  // a second input pinned at `level`
    uint8_t level = 0;
  };
  std::vector<std::string> undecided;

  for (const NetlistPort* grp : groups) {
    std::vector<NetBit> roots;
    for (NetBit b : grp->bits)
      for (NetBit r : tr.roots(b)) roots.push_back(r);
    std::vector<size_t> order;
    std::vector<NetBit> leaves;
    tr.cone(roots, order, leaves);
    std::vector<const NetlistPort*> in_cone;
    for (const NetlistPort* c : controls)
      if (std::binary_search(leaves.begin(), leaves.end(), c->bits[0])) in_cone.push_back(c);

    // Single controls first; then a control with one other input held, for
    // designs where a reset overrides the gated constant.
    std::vector<Attempt> attempts;
    for (const NetlistPort* c : in_cone) attempts.push_back({c});
    for (const NetlistPort* c : in_cone)
      for (const NetlistPort* h : in_cone)
        if (h != c)
          for (uint8_t lv : {uint8_t{1}, uint8_t{0}}) attempts.push_back({c, h, lv});

    bool grp_undecided = false;
    std::optional<std::pair<Attempt, Bytes>> pair_hit;
    for (const Attempt& at : attempts) {
      Fixed on{{at.ctl->bits[0], 1}};
      if (at.held) on[at.held->bits[0]] = at.level;
      bool too_large = false;
      auto k = prover.constant(grp->bits, on, too_large);
      grp_undecided |= too_large;
      if (!k) continue;
      Bytes val = pack(*k);
      if (check_carrier(val, key) == CarrierCheck::NoMatch) continue;
      // The control must matter: with it low the group may not be provably K.
      Fixed off = on;
      off[at.ctl->bits[0]] = 0;
      if (prover.ternary(grp->bits, off) == *k) continue;
      if (!at.held) {
        pair_hit = {at, val};
        break;
      }
      // Among pairs, prefer the one whose held input is reset-like: its
      // opposite level alone pins the group to some other constant.
      Fixed rst{{at.held->bits[0], static_cast<uint8_t>(!at.level)}};
      auto r = prover.ternary(grp->bits, rst);
      bool reset_like = std::find(r.begin(), r.end(), kX) == r.end();
      if (reset_like || !pair_hit) pair_hit = {at, val};
      if (reset_like) break;
    }
    if (!pair_hit) {
      if (grp_undecided) undecided.push_back(grp->name);
      continue;
    }
    const auto& [at, val] = *pair_hit;
    ev.found = true;
    ev.payload_bytes = val;
    ev.trigger_net = at.ctl->name;
    ev.carrier_net = grp->name;
    ev.trace = tr.cell_names(order, grp->bits);
    ev.check = check_carrier(val, key);
    if (ev.check == CarrierCheck::FullFrame) {
      try {
        ev.signatures = decode_payload(val, key);
      } catch (const Error&) {
      }
    }
    if (at.held) ev.diagnostic = "constant holds with " + at.held->name + "=" + std::to_string(at.level);
    return ev;
  }
  if (!undecided.empty()) {
    ev.diagnostic = "cone exceeds " + std::to_string(max_cone_inputs) + " free inputs for:";
    for (const auto& s : undecided) ev.diagnostic += " " + s;
  } else if (groups.empty()) {
    ev.diagnostic = "no output bus of the expected width";
  } else {
    ev.diagnostic = "no trigger-forced carrier value";
  }
  return ev;
}

}  // namespace rtlmark
