// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/eval.hpp"

#include <algorithm>

#include "rtlmark/errors.hpp"

namespace rtlmark::vlog {

namespace {

bool is_compare(const std::string& op) {
  return op == "==" || op == "!=" || op == "===" || op == "!==" || op == "<" || op == "<=" ||
         op == ">" || op == ">=";
}
bool is_logical(const std::string& op) { return op == "&&" || op == "||"; }
bool is_shift(const std::string& op) {
  return op == "<<" || op == ">>" || op == "<<<" || op == ">>>";
}
bool is_reduction(const std::string& op) {
  return op == "&" || op == "~&" || op == "|" || op == "~|" || op == "^" || op == "~^" ||
         op == "^~";
}

BitVec truth(const BitVec& v) {
  if (v.any_one()) return BitVec(1, 1);
  if (v.has_unknown()) return BitVec::unknown(1);
  return BitVec(1, 0);
}

BitVec merge(const BitVec& a, const BitVec& b) {
  BitVec r(a.width());
  for (int i = 0; i < a.width(); ++i) {
    if (!a.is_x(i) && !b.is_x(i) && a.bit(i) == b.bit(i))
      r.set_bit(i, a.bit(i));
    else
      r.set_x(i);
  }
  return r;
}

BitVec power(const BitVec& base, const BitVec& exp, bool sign) {
  int w = base.width();
  if (base.has_unknown() || exp.has_unknown()) return BitVec::unknown(w);
  bool exp_neg = sign && exp.bit(exp.width() - 1);
  if (exp_neg) {
    // Integer power with a negative exponent.
    BitVec one(w, 1);
    BitVec minus_one = BitVec::ones(w);
    if (base.is_zero()) return BitVec::unknown(w);
    if (base.identical(one)) return one;
    if (base.identical(minus_one)) return exp.bit(0) ? minus_one : one;
    return BitVec(w, 0);
  }
  BitVec result(w, 1);
  BitVec b = base;
  BitVec e = exp;
  for (int i = 0; i < e.width(); ++i) {
    if (e.bit(i)) result = result.mul(b);
    b = b.mul(b);
  }
  return result;
}

}  // namespace

std::optional<int> SignalValue::offset_of(int64_t i) const {
  int64_t off = left >= right ? i - right : right - i;
  if (off < 0 || off >= value.width()) return std::nullopt;
  return static_cast<int>(off);
}

const SignalValue& Evaluator::require(const std::string& name) const {
  const SignalValue* v = lookup_(name);
  if (!v) throw UnsupportedConstruct("unknown identifier '" + name + "'");
  return *v;
}

int Evaluator::self_width(const Expr& e) const {
  switch (e.kind) {
    case ExprKind::Identifier:
      return require(e.text).value.width();
    case ExprKind::Number:
      return e.number.value.width();
    case ExprKind::Paren:
      return self_width(e.operands[0]);
    case ExprKind::Unary:
      if (e.text == "!" || is_reduction(e.text)) return 1;
      return self_width(e.operands[0]);
    case ExprKind::Binary:
      if (is_compare(e.text) || is_logical(e.text)) return 1;
      if (is_shift(e.text) || e.text == "**") return self_width(e.operands[0]);
      return std::max(self_width(e.operands[0]), self_width(e.operands[1]));
    case ExprKind::Ternary:
      return std::max(self_width(e.operands[1]), self_width(e.operands[2]));
    case ExprKind::Concat: {
      int w = 0;
      for (const auto& o : e.operands) w += self_width(o);
      return w;
    }
    case ExprKind::Replicate: {
      auto n = eval(e.operands[0]).to_int();
      if (!n) throw UnsupportedConstruct("replication count is not constant");
      return static_cast<int>(*n) * self_width(e.operands[1]);
    }
    case ExprKind::Index:
      return 1;
    case ExprKind::PartSelect: {
      auto m = eval(e.operands[1]).to_int();
      auto l = eval(e.operands[2]).to_int();
      if (!m || !l) throw UnsupportedConstruct("part-select bounds are not constant");
      return static_cast<int>(std::llabs(*m - *l) + 1);
    }
    case ExprKind::IndexedPartSelect: {
      auto w = eval(e.operands[2]).to_int();
      if (!w) throw UnsupportedConstruct("indexed part-select width is not constant");
      return static_cast<int>(*w);
    }
  }
  return 1;
}

bool Evaluator::self_signed(const Expr& e) const {
  switch (e.kind) {
    case ExprKind::Identifier:
      return require(e.text).is_signed;
    case ExprKind::Number:
      return e.number.is_signed;
    case ExprKind::Paren:
      return self_signed(e.operands[0]);
    case ExprKind::Unary:
      if (e.text == "!" || is_reduction(e.text)) return false;
      return self_signed(e.operands[0]);
    case ExprKind::Binary:
      if (is_compare(e.text) || is_logical(e.text)) return false;
      if (is_shift(e.text) || e.text == "**") return self_signed(e.operands[0]);
      return self_signed(e.operands[0]) && self_signed(e.operands[1]);
    case ExprKind::Ternary:
      return self_signed(e.operands[1]) && self_signed(e.operands[2]);
    default:
      return false;
  }
}

BitVec Evaluator::eval(const Expr& e) const {
  return eval_ctx(e, self_width(e), self_signed(e));
}

BitVec Evaluator::eval_sized(const Expr& e, int width) const {
  int w = std::max(width, self_width(e));
  return eval_ctx(e, w, self_signed(e)).resized(width);
}

// `width` is the final context width (>= self width) and `sign` the
// signedness of the enclosing context-determined expression.
BitVec Evaluator::eval_ctx(const Expr& e, int width, bool sign) const {
  switch (e.kind) {
    case ExprKind::Identifier: {
      const SignalValue& v = require(e.text);
      return v.value.resized(width, sign && v.is_signed);
    }
    case ExprKind::Number:
      return e.number.value.resized(width, sign && e.number.is_signed);
    case ExprKind::Paren:
      return eval_ctx(e.operands[0], width, sign);
    case ExprKind::Unary: {
      const std::string& op = e.text;
      const Expr& x = e.operands[0];
      if (op == "!") return truth(eval(x)).operator~().resized(width);
      if (is_reduction(op)) {
        BitVec v = eval(x);
        BitVec r = op == "&" || op == "~&"   ? v.reduce_and()
                   : op == "|" || op == "~|" ? v.reduce_or()
                                             : v.reduce_xor();
        if (op[0] == '~' || op == "^~") r = ~r;
        return r.resized(width);
      }
      BitVec v = eval_ctx(x, width, sign);
      if (op == "~") return ~v;
      if (op == "-") return v.neg();
      return v;
    }
    case ExprKind::Binary: {
      const std::string& op = e.text;
      const Expr& l = e.operands[0];
      const Expr& r = e.operands[1];
      if (is_logical(op)) {
        BitVec a = truth(eval(l));
        BitVec b = truth(eval(r));
        BitVec res = op == "&&" ? (a & b) : (a | b);
        return res.resized(width);
      }
      if (is_compare(op)) {
        int w = std::max(self_width(l), self_width(r));
        bool s = self_signed(l) && self_signed(r);
        BitVec a = eval_ctx(l, w, s);
        BitVec b = eval_ctx(r, w, s);
        BitVec res;
        if (op == "===") res = BitVec(1, a.identical(b));
        else if (op == "!==") res = BitVec(1, !a.identical(b));
        else if (op == "==") res = a.eq(b);
        else if (op == "!=") res = ~a.eq(b);
        else if (op == "<") res = s ? a.slt(b) : a.ult(b);
        else if (op == ">") res = s ? b.slt(a) : b.ult(a);
        else if (op == "<=") res = ~(s ? b.slt(a) : b.ult(a));
        else res = ~(s ? a.slt(b) : a.ult(b));
        return res.resized(width);
      }
      if (is_shift(op)) {
        BitVec a = eval_ctx(l, width, sign);
        BitVec n = eval(r);
        if (n.has_unknown()) return BitVec::unknown(width);
        uint64_t amount = n.to_u64();
        for (int i = 64; i < n.width(); ++i)
          if (n.bit(i)) amount = UINT64_MAX;
        if (op == "<<" || op == "<<<") return a.shl(amount);
        if (op == ">>>" && sign) return a.ashr(amount);
        return a.lshr(amount);
      }
      if (op == "**") {
        BitVec a = eval_ctx(l, width, sign);
        BitVec b = eval(r);
        return power(a, b, self_signed(r));
      }
      BitVec a = eval_ctx(l, width, sign);
      BitVec b = eval_ctx(r, width, sign);
      if (op == "&") return a & b;
      if (op == "|") return a | b;
      if (op == "^") return a ^ b;
      if (op == "~^" || op == "^~") return ~(a ^ b);
      if (op == "+") return a.add(b);
      if (op == "-") return a.sub(b);
      if (op == "*") return a.mul(b);
      if (op == "/") return sign ? a.sdiv(b) : a.udiv(b);
      if (op == "%") return sign ? a.smod(b) : a.umod(b);
      throw UnsupportedConstruct("operator '" + op + "'");
    }
    case ExprKind::Ternary: {
      BitVec c = truth(eval(e.operands[0]));
      if (!c.has_unknown())
        return eval_ctx(c.bit(0) ? e.operands[1] : e.operands[2], width, sign);
      return merge(eval_ctx(e.operands[1], width, sign), eval_ctx(e.operands[2], width, sign));
    }
    case ExprKind::Concat: {
      BitVec acc;
      bool first = true;
      for (const auto& o : e.operands) {
        BitVec v = eval(o);
        acc = first ? v : BitVec::concat(acc, v);
        first = false;
      }
      return acc.resized(width);
    }
    case ExprKind::Replicate: {
      auto n = eval(e.operands[0]).to_int();
      if (!n) throw UnsupportedConstruct("replication count is not constant");
      BitVec part = eval(e.operands[1]);
      BitVec acc(0);
      for (int64_t i = 0; i < *n; ++i) acc = i == 0 ? part : BitVec::concat(acc, part);
      return acc.resized(width);
    }
    case ExprKind::Index: {
      const Expr& base = e.operands[0];
      if (!base.is_ident()) throw UnsupportedConstruct("select of a non-identifier");
      const SignalValue& sv = require(base.text);
      BitVec idx = eval(e.operands[1]);
      BitVec r = BitVec::unknown(1);
      if (auto i = idx.to_int()) {
        if (auto off = sv.offset_of(*i)) r = sv.value.slice(*off, 1);
      }
      return r.resized(width);
    }
    case ExprKind::PartSelect: {
      const Expr& base = e.operands[0];
      if (!base.is_ident()) throw UnsupportedConstruct("select of a non-identifier");
      const SignalValue& sv = require(base.text);
      auto m = eval(e.operands[1]).to_int();
      auto l = eval(e.operands[2]).to_int();
      if (!m || !l) throw UnsupportedConstruct("part-select bounds are not constant");
      int w = static_cast<int>(std::llabs(*m - *l) + 1);
      BitVec r = BitVec::unknown(w);
      for (int k = 0; k < w; ++k) {
        int64_t idx = sv.left >= sv.right ? *l + k : *l - k;
        if (auto off = sv.offset_of(idx)) {
          if (sv.value.is_x(*off))
            r.set_x(k);
          else
            r.set_bit(k, sv.value.bit(*off));
        }
      }
      return r.resized(width);
    }
    case ExprKind::IndexedPartSelect: {
      const Expr& base = e.operands[0];
      if (!base.is_ident()) throw UnsupportedConstruct("select of a non-identifier");
      const SignalValue& sv = require(base.text);
      auto wv = eval(e.operands[2]).to_int();
      if (!wv) throw UnsupportedConstruct("indexed part-select width is not constant");
      int w = static_cast<int>(*wv);
      BitVec r = BitVec::unknown(w);
      auto start = eval(e.operands[1]).to_int();
      if (!start) return r.resized(width);
      // The lowest-significance index of the selected slice.
      bool descending = sv.left >= sv.right;
      int64_t lsb_idx;
      if (e.text == "+:")
        lsb_idx = descending ? *start : *start + w - 1;
      else
        lsb_idx = descending ? *start - w + 1 : *start;
      for (int k = 0; k < w; ++k) {
        int64_t idx = descending ? lsb_idx + k : lsb_idx - k;
        if (auto off = sv.offset_of(idx)) {
          if (sv.value.is_x(*off))
            r.set_x(k);
          else
            r.set_bit(k, sv.value.bit(*off));
        }
      }
      return r.resized(width);
    }
  }
  return BitVec::unknown(width);
}

std::optional<BitVec> const_eval(const Expr& e, const ParamEnv& env) {
  Evaluator ev([&](const std::string& n) -> const SignalValue* {
    auto it = env.find(n);
    return it == env.end() ? nullptr : &it->second;
  });
  try {
    return ev.eval(e);
  } catch (const UnsupportedConstruct&) {
    return std::nullopt;
  }
}

std::optional<int64_t> const_int(const Expr& e, const ParamEnv& env) {
  Evaluator ev([&](const std::string& n) -> const SignalValue* {
    auto it = env.find(n);
    return it == env.end() ? nullptr : &it->second;
  });
  BitVec v;
  bool sign = false;
  try {
    v = ev.eval(e);
    sign = ev.self_signed(e);
  } catch (const UnsupportedConstruct&) {
    return std::nullopt;
  }
  if (v.has_unknown()) return std::nullopt;
  if (sign && v.width() > 0 && v.bit(v.width() - 1)) {
    auto m = v.neg().to_int();
    if (!m) return std::nullopt;
    return -*m;
  }
  return v.to_int();
}

namespace {

void add_param(ParamEnv& env, const ParamDecl& d, const ParamAssign& p,
               const std::map<std::string, BitVec>* overrides) {
  std::optional<BitVec> v;
  if (overrides) {
    auto it = overrides->find(p.name);
    if (it != overrides->end()) v = it->second;
  }
  if (!v) v = const_eval(p.value, env);
  if (!v) return;
  SignalValue sv;
  bool sign = d.is_signed;
  if (d.range) {
    auto m = const_int(d.range->msb, env);
    auto l = const_int(d.range->lsb, env);
    if (!m || !l) return;
    sv.left = static_cast<int>(*m);
    sv.right = static_cast<int>(*l);
    sv.value = v->resized(static_cast<int>(std::llabs(*m - *l) + 1), false);
  } else {
    // Untyped parameters keep the width and sign of their value.
    Evaluator ev([&](const std::string& n) -> const SignalValue* {
      auto it = env.find(n);
      return it == env.end() ? nullptr : &it->second;
    });
    bool vs = false;
    if (!overrides || !overrides->count(p.name)) {
      try {
        vs = ev.self_signed(p.value);
      } catch (const UnsupportedConstruct&) {
      }
    } else {
      vs = true;
    }
    sign = sign || vs;
    sv.value = *v;
    sv.left = v->width() - 1;
    sv.right = 0;
  }
  sv.is_signed = sign;
  env[p.name] = sv;
}

}  // namespace

ParamEnv module_params(const ModuleDecl& m, const std::map<std::string, BitVec>& overrides) {
  ParamEnv env;
  for (const auto& d : m.header_params)
    for (const auto& p : d.params) add_param(env, d, p, &overrides);
  for (const auto& it : m.items)
    if (auto* d = it.as<ParamDecl>())
      for (const auto& p : d->params) add_param(env, *d, p, d->local ? nullptr : &overrides);
  return env;
}

}  // namespace rtlmark::vlog
