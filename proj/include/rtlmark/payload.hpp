// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>

#include "rtlmark/bitvec.hpp"
#include "rtlmark/crypto.hpp"

namespace rtlmark {

constexpr size_t kDefaultPayloadCapacity = 64;

struct Payload {
  std::string model_signature;
  std::string developer_signature;
  Bytes encoded;
};

/// Layout: tag(K) followed by [len][model][len][dev][mac16] XOR keystream(K).
/// The tag is a keyed byte in 1..254 so a carrier never reduces to all zeros
/// or all ones.
Payload encode_payload(const std::string& model_sig, const std::string& dev_sig,
                       const WatermarkKey& key, size_t capacity = kDefaultPayloadCapacity);

/// Inverse of encode_payload. Trailing bytes after a valid frame are ignored.
std::pair<std::string, std::string> decode_payload(const Bytes& bytes, const WatermarkKey& key);

uint8_t payload_tag(const WatermarkKey& key);

/// Keystream bytes following the frame, used to pad carriers wider than
/// the payload. Deterministic in (key, offset).
Bytes payload_filler(const WatermarkKey& key, size_t offset, size_t count);

/// Bytes packed into a `width`-bit carrier constant (LSB-first): the payload
/// prefix that fits, padded with filler.
BitVec carrier_constant(const Payload& p, const WatermarkKey& key, int width);

enum class CarrierCheck { NoMatch, TagOnly, FullFrame };
/// Classifies carrier bytes: tag mismatch, tag match with an incomplete
/// frame, or a complete frame whose mac verifies.
CarrierCheck check_carrier(const Bytes& bytes, const WatermarkKey& key);

}  // namespace rtlmark
