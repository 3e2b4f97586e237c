// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/bitvec.hpp"

#include <algorithm>
#include <cassert>

namespace rtlmark {

namespace {
int words_for(int width) { return width <= 0 ? 0 : (width + 63) / 64; }
}  // namespace

BitVec::BitVec(int width, uint64_t value) : width_(width) {
  val_.assign(words_for(width), 0);
  unk_.assign(words_for(width), 0);
  if (!val_.empty()) val_[0] = value;
  trim();
}

BitVec BitVec::unknown(int width) {
  BitVec v(width);
  std::fill(v.unk_.begin(), v.unk_.end(), ~uint64_t{0});
  v.trim();
  return v;
}

BitVec BitVec::ones(int width) {
  BitVec v(width);
  std::fill(v.val_.begin(), v.val_.end(), ~uint64_t{0});
  v.trim();
  return v;
}

void BitVec::trim() {
  if (width_ <= 0) return;
  int rem = width_ % 64;
  if (rem != 0) {
    uint64_t mask = (uint64_t{1} << rem) - 1;
    val_.back() &= mask;
    unk_.back() &= mask;
  }
  for (int i = 0; i < words(); ++i) val_[i] &= ~unk_[i];
}

bool BitVec::bit(int i) const {
  if (i < 0 || i >= width_) return false;
  return (val_[i / 64] >> (i % 64)) & 1;
}

bool BitVec::is_x(int i) const {
  if (i < 0 || i >= width_) return true;
  return (unk_[i / 64] >> (i % 64)) & 1;
}

void BitVec::set_bit(int i, bool v) {
  if (i < 0 || i >= width_) return;
  uint64_t m = uint64_t{1} << (i % 64);
  unk_[i / 64] &= ~m;
  if (v)
    val_[i / 64] |= m;
  else
    val_[i / 64] &= ~m;
}

void BitVec::set_x(int i) {
  if (i < 0 || i >= width_) return;
  uint64_t m = uint64_t{1} << (i % 64);
  unk_[i / 64] |= m;
  val_[i / 64] &= ~m;
}

bool BitVec::has_unknown() const {
  return std::any_of(unk_.begin(), unk_.end(), [](uint64_t w) { return w != 0; });
}

bool BitVec::is_zero() const {
  return !has_unknown() &&
         std::all_of(val_.begin(), val_.end(), [](uint64_t w) { return w == 0; });
}

bool BitVec::any_one() const {
  return std::any_of(val_.begin(), val_.end(), [](uint64_t w) { return w != 0; });
}

uint64_t BitVec::to_u64() const { return val_.empty() ? 0 : val_[0]; }

std::optional<int64_t> BitVec::to_int() const {
  if (has_unknown()) return std::nullopt;
  for (int i = 1; i < words(); ++i)
    if (val_[i] != 0) return std::nullopt;
  uint64_t v = to_u64();
  if (v > static_cast<uint64_t>(INT64_MAX)) return std::nullopt;
  return static_cast<int64_t>(v);
}

BitVec BitVec::resized(int width, bool sign_extend) const {
  BitVec r(width);
  int n = std::min(width, width_);
  for (int w = 0; w < std::min(words(), r.words()); ++w) {
    r.val_[w] = val_[w];
    r.unk_[w] = unk_[w];
  }
  if (width > width_ && width_ > 0) {
    bool fill_x = sign_extend && is_x(width_ - 1);
    bool fill_one = sign_extend && !fill_x && bit(width_ - 1);
    for (int i = width_; i < width; ++i) {
      if (fill_x)
        r.set_x(i);
      else
        r.set_bit(i, fill_one);
    }
  }
  (void)n;
  r.trim();
  return r;
}

BitVec BitVec::slice(int lsb, int width) const {
  BitVec r(width);
  for (int i = 0; i < width; ++i) {
    int src = lsb + i;
    if (src < 0 || src >= width_)
      r.set_x(i);
    else if (is_x(src))
      r.set_x(i);
    else
      r.set_bit(i, bit(src));
  }
  return r;
}

void BitVec::assign_slice(int lsb, const BitVec& v) {
  for (int i = 0; i < v.width(); ++i) {
    int dst = lsb + i;
    if (dst < 0 || dst >= width_) continue;
    if (v.is_x(i))
      set_x(dst);
    else
      set_bit(dst, v.bit(i));
  }
}

BitVec BitVec::operator~() const {
  BitVec r = *this;
  for (int i = 0; i < words(); ++i) r.val_[i] = ~val_[i] & ~unk_[i];
  r.trim();
  return r;
}

BitVec BitVec::operator&(const BitVec& o) const {
  assert(width_ == o.width_);
  BitVec r(width_);
  for (int i = 0; i < words(); ++i) {
    uint64_t zero_a = ~val_[i] & ~unk_[i];
    uint64_t zero_b = ~o.val_[i] & ~o.unk_[i];
    uint64_t known_zero = zero_a | zero_b;
    r.val_[i] = val_[i] & o.val_[i];
    r.unk_[i] = (unk_[i] | o.unk_[i]) & ~known_zero;
  }
  r.trim();
  return r;
}

BitVec BitVec::operator|(const BitVec& o) const {
  assert(width_ == o.width_);
  BitVec r(width_);
  for (int i = 0; i < words(); ++i) {
    uint64_t known_one = val_[i] | o.val_[i];
    r.val_[i] = known_one;
    r.unk_[i] = (unk_[i] | o.unk_[i]) & ~known_one;
  }
  r.trim();
  return r;
}

BitVec BitVec::operator^(const BitVec& o) const {
  assert(width_ == o.width_);
  BitVec r(width_);
  for (int i = 0; i < words(); ++i) {
    r.unk_[i] = unk_[i] | o.unk_[i];
    r.val_[i] = val_[i] ^ o.val_[i];
  }
  r.trim();
  return r;
}

BitVec BitVec::add(const BitVec& o) const {
  if (has_unknown() || o.has_unknown()) return unknown(width_);
  BitVec r(width_);
  unsigned __int128 carry = 0;
  for (int i = 0; i < words(); ++i) {
    unsigned __int128 s = static_cast<unsigned __int128>(val_[i]) + o.val_[i] + carry;
    r.val_[i] = static_cast<uint64_t>(s);
    carry = s >> 64;
  }
  r.trim();
  return r;
}

BitVec BitVec::neg() const {
  if (has_unknown()) return unknown(width_);
  return (~*this).add(BitVec(width_, 1));
}

BitVec BitVec::sub(const BitVec& o) const {
  if (has_unknown() || o.has_unknown()) return unknown(width_);
  return add(o.neg());
}

BitVec BitVec::mul(const BitVec& o) const {
  if (has_unknown() || o.has_unknown()) return unknown(width_);
  BitVec r(width_);
  for (int i = 0; i < words(); ++i) {
    unsigned __int128 carry = 0;
    for (int j = 0; i + j < words(); ++j) {
      unsigned __int128 cur = static_cast<unsigned __int128>(val_[i]) * o.val_[j] +
                              r.val_[i + j] + carry;
      r.val_[i + j] = static_cast<uint64_t>(cur);
      carry = cur >> 64;
    }
  }
  r.trim();
  return r;
}

namespace {
// Restoring long division on equal-width operands.
void divmod(const BitVec& a, const BitVec& b, BitVec& q, BitVec& r) {
  int w = a.width();
  q = BitVec(w);
  r = BitVec(w);
  for (int i = w - 1; i >= 0; --i) {
    r = r.shl(1);
    r.set_bit(0, a.bit(i));
    if (!r.ult(b).bit(0)) {
      r = r.sub(b);
      q.set_bit(i, true);
    }
  }
}
}  // namespace

BitVec BitVec::udiv(const BitVec& o) const {
  if (has_unknown() || o.has_unknown() || o.is_zero()) return unknown(width_);
  BitVec q, r;
  divmod(*this, o, q, r);
  return q;
}

BitVec BitVec::umod(const BitVec& o) const {
  if (has_unknown() || o.has_unknown() || o.is_zero()) return unknown(width_);
  BitVec q, r;
  divmod(*this, o, q, r);
  return r;
}

BitVec BitVec::sdiv(const BitVec& o) const {
  if (has_unknown() || o.has_unknown() || o.is_zero()) return unknown(width_);
  bool na = bit(width_ - 1), nb = o.bit(width_ - 1);
  BitVec a = na ? neg() : *this;
  BitVec b = nb ? o.neg() : o;
  BitVec q = a.udiv(b);
  return (na != nb) ? q.neg() : q;
}

BitVec BitVec::smod(const BitVec& o) const {
  if (has_unknown() || o.has_unknown() || o.is_zero()) return unknown(width_);
  bool na = bit(width_ - 1), nb = o.bit(width_ - 1);
  BitVec a = na ? neg() : *this;
  BitVec b = nb ? o.neg() : o;
  BitVec r = a.umod(b);
  return na ? r.neg() : r;
}

BitVec BitVec::shl(uint64_t n) const {
  BitVec r(width_);
  for (int i = width_ - 1; i >= 0; --i) {
    if (static_cast<uint64_t>(i) < n) break;
    int src = i - static_cast<int>(n);
    if (is_x(src))
      r.set_x(i);
    else
      r.set_bit(i, bit(src));
  }
  return r;
}

BitVec BitVec::lshr(uint64_t n) const {
  BitVec r(width_);
  for (int i = 0; i < width_; ++i) {
    uint64_t src = static_cast<uint64_t>(i) + n;
    if (src >= static_cast<uint64_t>(width_)) break;
    if (is_x(static_cast<int>(src)))
      r.set_x(i);
    else
      r.set_bit(i, bit(static_cast<int>(src)));
  }
  return r;
}

BitVec BitVec::ashr(uint64_t n) const {
  if (width_ == 0) return *this;
  BitVec r = lshr(n);
  bool sx = is_x(width_ - 1), sb = bit(width_ - 1);
  uint64_t fill_from = n >= static_cast<uint64_t>(width_) ? 0 : width_ - n;
  for (int i = static_cast<int>(fill_from); i < width_; ++i) {
    if (sx)
      r.set_x(i);
    else
      r.set_bit(i, sb);
  }
  return r;
}

BitVec BitVec::eq(const BitVec& o) const {
  assert(width_ == o.width_);
  bool unknown_seen = false;
  for (int i = 0; i < width_; ++i) {
    if (is_x(i) || o.is_x(i)) {
      unknown_seen = true;
      continue;
    }
    if (bit(i) != o.bit(i)) return BitVec(1, 0);
  }
  return unknown_seen ? BitVec::unknown(1) : BitVec(1, 1);
}

BitVec BitVec::ult(const BitVec& o) const {
  assert(width_ == o.width_);
  if (has_unknown() || o.has_unknown()) return BitVec::unknown(1);
  for (int w = words() - 1; w >= 0; --w) {
    if (val_[w] != o.val_[w]) return BitVec(1, val_[w] < o.val_[w] ? 1 : 0);
  }
  return BitVec(1, 0);
}

BitVec BitVec::slt(const BitVec& o) const {
  assert(width_ == o.width_);
  if (has_unknown() || o.has_unknown()) return BitVec::unknown(1);
  bool na = bit(width_ - 1), nb = o.bit(width_ - 1);
  if (na != nb) return BitVec(1, na ? 1 : 0);
  return ult(o);
}

bool BitVec::identical(const BitVec& o) const {
  return width_ == o.width_ && val_ == o.val_ && unk_ == o.unk_;
}

BitVec BitVec::reduce_and() const {
  bool unk = false;
  for (int i = 0; i < width_; ++i) {
    if (is_x(i))
      unk = true;
    else if (!bit(i))
      return BitVec(1, 0);
  }
  return unk ? unknown(1) : BitVec(1, 1);
}

BitVec BitVec::reduce_or() const {
  if (any_one()) return BitVec(1, 1);
  return has_unknown() ? unknown(1) : BitVec(1, 0);
}

BitVec BitVec::reduce_xor() const {
  if (has_unknown()) return unknown(1);
  int ones = 0;
  for (auto w : val_) ones += __builtin_popcountll(w);
  return BitVec(1, ones & 1);
}

BitVec BitVec::concat(const BitVec& hi, const BitVec& lo) {
  BitVec r(hi.width() + lo.width());
  r.assign_slice(0, lo);
  r.assign_slice(lo.width(), hi);
  return r;
}

std::string BitVec::to_binary() const {
  std::string s;
  s.reserve(width_);
  for (int i = width_ - 1; i >= 0; --i) s.push_back(is_x(i) ? 'x' : (bit(i) ? '1' : '0'));
  return s;
}

std::string BitVec::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s;
  int nibbles = (width_ + 3) / 4;
  for (int n = nibbles - 1; n >= 0; --n) {
    int v = 0;
    bool unk = false;
    for (int b = 0; b < 4; ++b) {
      int i = n * 4 + b;
      if (i >= width_) continue;
      if (is_x(i)) unk = true;
      if (bit(i)) v |= 1 << b;
    }
    s.push_back(unk ? 'x' : digits[v]);
  }
  return s.empty() ? "0" : s;
}

std::optional<BitVec> BitVec::parse_digits(std::string_view digits, int base) {
  if (digits.empty()) return std::nullopt;
  if (base == 10) {
    BitVec acc(1);
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      // Grow so multiplication by 10 cannot overflow.
      acc = acc.resized(acc.width() + 4);
      acc = acc.mul(BitVec(acc.width(), 10)).add(BitVec(acc.width(), c - '0'));
    }
    int msb = 0;
    for (int i = acc.width() - 1; i >= 0; --i)
      if (acc.bit(i)) {
        msb = i;
        break;
      }
    return acc.resized(msb + 1);
  }
  int bits_per = base == 2 ? 1 : base == 8 ? 3 : base == 16 ? 4 : 0;
  if (bits_per == 0) return std::nullopt;
  int width = static_cast<int>(digits.size()) * bits_per;
  BitVec r(width);
  int pos = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it, pos += bits_per) {
    char c = *it;
    if (c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?') {
      for (int b = 0; b < bits_per; ++b) r.set_x(pos + b);
      continue;
    }
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      v = c - 'A' + 10;
    else
      return std::nullopt;
    if (v >= base) return std::nullopt;
    for (int b = 0; b < bits_per; ++b) r.set_bit(pos + b, (v >> b) & 1);
  }
  return r;
}

}  // namespace rtlmark
