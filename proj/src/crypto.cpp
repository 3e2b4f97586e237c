// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/crypto.hpp"

#include <fcntl.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cctype>
#include <fstream>
#include <sstream>

#include "rtlmark/errors.hpp"

namespace rtlmark {

Bytes sha256(std::string_view data) {
  Bytes out(SHA256_DIGEST_LENGTH);
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
  return out;
}

Bytes hmac_sha256(const WatermarkKey& key, std::string_view message) {
  Bytes out(SHA256_DIGEST_LENGTH);
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.secret.data(), static_cast<int>(key.secret.size()),
       reinterpret_cast<const unsigned char*>(message.data()), message.size(), out.data(), &len);
  out.resize(len);
  return out;
}

std::string to_hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (uint8_t c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 15]);
  }
  return s;
}

std::string WatermarkKey::to_hex() const { return rtlmark::to_hex(Bytes(secret.begin(), secret.end())); }

std::string WatermarkKey::key_id() const {
  Bytes h = sha256(std::string_view(reinterpret_cast<const char*>(secret.data()), secret.size()));
  return rtlmark::to_hex(h).substr(0, 8);
}

WatermarkKey WatermarkKey::generate() {
  WatermarkKey k;
  if (RAND_bytes(k.secret.data(), static_cast<int>(k.secret.size())) != 1)
    throw Error("random number generator failure");
  return k;
}

WatermarkKey WatermarkKey::from_hex(std::string_view hex) {
  std::string clean;
  for (char c : hex)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  if (clean.size() != 64) throw Error("key must be 64 hex digits");
  WatermarkKey k;
  for (size_t i = 0; i < 32; ++i) {
    auto nib = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw Error("key contains a non-hex character");
    };
    k.secret[i] = static_cast<uint8_t>(nib(clean[2 * i]) << 4 | nib(clean[2 * i + 1]));
  }
  return k;
}

WatermarkKey WatermarkKey::from_seed(uint64_t seed) {
  Bytes h = sha256("rtlmark-seed|" + std::to_string(seed));
  WatermarkKey k;
  std::copy(h.begin(), h.end(), k.secret.begin());
  return k;
}

Bytes derive(const WatermarkKey& key, std::string_view module, std::string_view rule,
             std::string_view label) {
  std::string msg = "rtlmark|";
  msg.append(module).append("|").append(rule).append("|").append(label);
  return hmac_sha256(key, msg);
}

uint64_t derive_u64(const WatermarkKey& key, std::string_view module, std::string_view rule,
                    std::string_view label) {
  Bytes b = derive(key, module, rule, label);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | b[i];
  return v;
}

WatermarkKey load_key(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read key file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return WatermarkKey::from_hex(ss.str());
}

void save_key(const std::string& path, const WatermarkKey& key) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) throw Error("cannot create key file '" + path + "'");
  ::fchmod(fd, 0600);
  std::string text = key.to_hex() + "\n";
  ssize_t n = ::write(fd, text.data(), text.size());
  ::close(fd);
  if (n != static_cast<ssize_t>(text.size())) throw Error("short write to key file '" + path + "'");
}

}  // namespace rtlmark
