// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlmark {

/// Arbitrary-width four-state bit vector. X and Z are merged into a single
/// "unknown" state; an unknown bit always stores 0 in the value plane.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(int width, uint64_t value = 0);

  static BitVec unknown(int width);
  static BitVec ones(int width);

  int width() const { return width_; }
  bool bit(int i) const;
  bool is_x(int i) const;
  void set_bit(int i, bool v);
  void set_x(int i);

  bool has_unknown() const;
  bool is_zero() const;  // known and all zero
  bool any_one() const;  // at least one bit known to be 1

  /// Low 64 bits; unknown bits read as 0.
  uint64_t to_u64() const;
  std::optional<int64_t> to_int() const;  // nullopt when unknown or too wide

  BitVec resized(int width, bool sign_extend = false) const;
  BitVec slice(int lsb, int width) const;
  void assign_slice(int lsb, const BitVec& v);

  // Bitwise (per-bit four-state tables).
  BitVec operator~() const;
  BitVec operator&(const BitVec& o) const;
  BitVec operator|(const BitVec& o) const;
  BitVec operator^(const BitVec& o) const;

  // Arithmetic; any unknown operand bit makes the whole result unknown.
  BitVec add(const BitVec& o) const;
  BitVec sub(const BitVec& o) const;
  BitVec mul(const BitVec& o) const;
  BitVec udiv(const BitVec& o) const;
  BitVec umod(const BitVec& o) const;
  BitVec sdiv(const BitVec& o) const;
  BitVec smod(const BitVec& o) const;
  BitVec neg() const;
  BitVec shl(uint64_t n) const;
  BitVec lshr(uint64_t n) const;
  BitVec ashr(uint64_t n) const;

  /// Three-valued comparison helpers: 0, 1 or unknown as a 1-bit vector.
  BitVec eq(const BitVec& o) const;
  BitVec ult(const BitVec& o) const;
  BitVec slt(const BitVec& o) const;
  /// Four-state identity (===): always known.
  bool identical(const BitVec& o) const;

  BitVec reduce_and() const;
  BitVec reduce_or() const;
  BitVec reduce_xor() const;

  /// Concatenate: `hi` occupies the upper bits.
  static BitVec concat(const BitVec& hi, const BitVec& lo);

  /// Binary digits, MSB first, with x for unknown bits.
  std::string to_binary() const;
  std::string to_hex() const;  // unknown nibbles print as x

  /// Parse digits in base 2/8/10/16 (no underscores). x/z/? allowed for
  /// bases 2/8/16. Result width is the minimal needed (at least 1).
  static std::optional<BitVec> parse_digits(std::string_view digits, int base);

  bool operator==(const BitVec& o) const = default;

 private:
  int width_ = 0;
  std::vector<uint64_t> val_;
  std::vector<uint64_t> unk_;

  int words() const { return static_cast<int>(val_.size()); }
  void trim();
};

}  // namespace rtlmark
