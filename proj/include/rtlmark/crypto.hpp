// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rtlmark {

using Bytes = std::vector<uint8_t>;

struct WatermarkKey {
  std::array<uint8_t, 32> secret{};

  /// Short public label: first 8 hex digits of SHA-256(secret).
  std::string key_id() const;
  std::string to_hex() const;

  static WatermarkKey generate();
  static WatermarkKey from_hex(std::string_view hex);
  /// Deterministic key for tests and seed sweeps: SHA-256 of the seed text.
  static WatermarkKey from_seed(uint64_t seed);

  bool operator==(const WatermarkKey&) const = default;
};

Bytes sha256(std::string_view data);
Bytes hmac_sha256(const WatermarkKey& key, std::string_view message);
std::string to_hex(const Bytes& b);

/// Keyed parameter stream for one (module, rule, label) context.
Bytes derive(const WatermarkKey& key, std::string_view module, std::string_view rule,
             std::string_view label = {});
uint64_t derive_u64(const WatermarkKey& key, std::string_view module, std::string_view rule,
                    std::string_view label = {});

/// Key files hold 64 hex digits and are created with mode 0600.
WatermarkKey load_key(const std::string& path);
void save_key(const std::string& path, const WatermarkKey& key);

}  // namespace rtlmark
