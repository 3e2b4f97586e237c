// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/payload.hpp"

#include "rtlmark/errors.hpp"

namespace rtlmark {

namespace {

Bytes keystream(const WatermarkKey& key, std::string_view label, size_t offset, size_t count) {
  Bytes out;
  out.reserve(count);
  size_t block = offset / 32;
  size_t skip = offset % 32;
  while (out.size() < count) {
    Bytes b = hmac_sha256(key, std::string(label) + "|" + std::to_string(block++));
    for (size_t i = skip; i < b.size() && out.size() < count; ++i) out.push_back(b[i]);
    skip = 0;
  }
  return out;
}

Bytes mac16(const WatermarkKey& key, const Bytes& frame) {
  std::string msg = "rtlmark-payload-mac|";
  msg.append(frame.begin(), frame.end());
  Bytes h = hmac_sha256(key, msg);
  return {h[0], h[1]};
}

enum class FrameStatus { Ok, Incomplete, Invalid };

// Decrypts and parses the frame that follows the tag byte.
FrameStatus parse_frame(const Bytes& bytes, const WatermarkKey& key, std::string* model,
                        std::string* dev) {
  size_t n = bytes.size() - 1;
  Bytes plain = keystream(key, "rtlmark-payload-stream", 0, n);
  for (size_t i = 0; i < n; ++i) plain[i] ^= bytes[i + 1];
  if (n < 1) return FrameStatus::Incomplete;
  size_t lm = plain[0];
  if (lm == 0) return FrameStatus::Invalid;
  if (n < 2 + lm) return FrameStatus::Incomplete;
  size_t ld = plain[1 + lm];
  if (ld == 0) return FrameStatus::Invalid;
  size_t frame_len = 2 + lm + ld;
  if (n < frame_len + 2) return FrameStatus::Incomplete;
  Bytes frame(plain.begin(), plain.begin() + static_cast<long>(frame_len));
  Bytes mac = mac16(key, frame);
  if (mac[0] != plain[frame_len] || mac[1] != plain[frame_len + 1]) return FrameStatus::Invalid;
  if (model) model->assign(plain.begin() + 1, plain.begin() + 1 + static_cast<long>(lm));
  if (dev)
    dev->assign(plain.begin() + 2 + static_cast<long>(lm),
                plain.begin() + static_cast<long>(frame_len));
  return FrameStatus::Ok;
}

}  // namespace

uint8_t payload_tag(const WatermarkKey& key) {
  Bytes h = hmac_sha256(key, "rtlmark-payload-tag");
  return static_cast<uint8_t>(1 + h[0] % 254);
}

Payload encode_payload(const std::string& model_sig, const std::string& dev_sig,
                       const WatermarkKey& key, size_t capacity) {
  if (model_sig.empty() || dev_sig.empty()) throw Error("payload signatures must be non-empty");
  if (model_sig.size() > 255 || dev_sig.size() > 255)
    throw PayloadTooLarge("signature longer than 255 bytes");
  Bytes frame;
  frame.push_back(static_cast<uint8_t>(model_sig.size()));
  frame.insert(frame.end(), model_sig.begin(), model_sig.end());
  frame.push_back(static_cast<uint8_t>(dev_sig.size()));
  frame.insert(frame.end(), dev_sig.begin(), dev_sig.end());
  Bytes mac = mac16(key, frame);
  frame.insert(frame.end(), mac.begin(), mac.end());
  size_t total = frame.size() + 1;
  if (total > capacity)
    throw PayloadTooLarge("encoded payload is " + std::to_string(total) +
                          " bytes; capacity is " + std::to_string(capacity));
  Bytes ks = keystream(key, "rtlmark-payload-stream", 0, frame.size());
  Payload p{model_sig, dev_sig, {}};
  p.encoded.push_back(payload_tag(key));
  for (size_t i = 0; i < frame.size(); ++i) p.encoded.push_back(frame[i] ^ ks[i]);
  return p;
}

std::pair<std::string, std::string> decode_payload(const Bytes& bytes, const WatermarkKey& key) {
  if (bytes.empty()) throw BadFraming("empty payload");
  if (bytes[0] != payload_tag(key)) throw BadFraming("payload tag does not match the key");
  std::string model, dev;
  switch (parse_frame(bytes, key, &model, &dev)) {
    case FrameStatus::Ok:
      return {model, dev};
    case FrameStatus::Incomplete:
      throw BadFraming("payload is truncated");
    case FrameStatus::Invalid:
      break;
  }
  throw BadFraming("payload checksum mismatch");
}

Bytes payload_filler(const WatermarkKey& key, size_t offset, size_t count) {
  return keystream(key, "rtlmark-payload-filler", offset, count);
}

BitVec carrier_constant(const Payload& p, const WatermarkKey& key, int width) {
  size_t nbytes = static_cast<size_t>((width + 7) / 8);
  Bytes b(p.encoded.begin(), p.encoded.begin() + static_cast<long>(std::min(nbytes, p.encoded.size())));
  if (b.size() < nbytes) {
    Bytes f = payload_filler(key, b.size(), nbytes - b.size());
    b.insert(b.end(), f.begin(), f.end());
  }
  BitVec v(width);
  for (int i = 0; i < width; ++i) v.set_bit(i, (b[static_cast<size_t>(i / 8)] >> (i % 8)) & 1);
  return v;
}

CarrierCheck check_carrier(const Bytes& bytes, const WatermarkKey& key) {
  if (bytes.empty() || bytes[0] != payload_tag(key)) return CarrierCheck::NoMatch;
  switch (parse_frame(bytes, key, nullptr, nullptr)) {
    case FrameStatus::Ok:
      return CarrierCheck::FullFrame;
    case FrameStatus::Incomplete:
      return CarrierCheck::TagOnly;
    case FrameStatus::Invalid:
      break;
  }
  return CarrierCheck::NoMatch;
}

}  // namespace rtlmark
