#include "seedsim/protocol/frame.hpp"

#include <sodium.h>

#include <fmt/format.h>

#include "seedsim/protocol/crc.hpp"

namespace seedsim::protocol {

std::array<std::uint8_t, kSignatureTagSize> signature_tag(ByteView signed_bytes, const LinkKey& key) {
  unsigned char mac[crypto_auth_hmacsha256_BYTES];
  crypto_auth_hmacsha256_state state;
  crypto_auth_hmacsha256_init(&state, key.data(), key.size());
  crypto_auth_hmacsha256_update(&state, signed_bytes.data(), signed_bytes.size());
  crypto_auth_hmacsha256_final(&state, mac);
  std::array<std::uint8_t, kSignatureTagSize> tag{};
  std::copy_n(mac, kSignatureTagSize, tag.begin());
  return tag;
}

Bytes encode_frame(const FrameHeader& header, ByteView payload, std::optional<SigningParams> signing) {
  if (payload.size() > kMaxFramePayload) {
    throw Error(Errc::BadLength, fmt::format("payload of {} bytes exceeds 255", payload.size()));
  }
  Bytes out;
  out.reserve(kFrameHeaderSize + payload.size() + kFrameCrcSize + (signing ? kSignatureSize : 0));
  ByteWriter w(out);
  w.put<std::uint8_t>(kFrameSync);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(payload.size()));
  w.put<std::uint8_t>(header.seq);
  w.put<std::uint8_t>(header.src);
  w.put<std::uint8_t>(header.dst);
  w.put<std::uint16_t>(header.msg_id);
  w.put<std::uint8_t>(signing ? kFlagSigned : 0);
  w.put_bytes(payload);
  w.put<std::uint16_t>(crc16(ByteView(out).subspan(1)));
  if (signing) {
    if (signing->counter > kMaxSignatureCounter) throw Error(Errc::BadLength, "signature counter exceeds 48 bits");
    w.put_uint(signing->counter, kSignatureCounterSize);
    const auto tag = signature_tag(out, signing->key);
    w.put_bytes(tag);
  }
  return out;
}

Frame parse_frame(ByteView bytes) {
  if (bytes.empty()) throw Error(Errc::Truncated, "empty frame");
  if (bytes[0] != kFrameSync) throw Error(Errc::BadSync, fmt::format("sync byte 0x{:02x}", bytes[0]));
  if (bytes.size() < kFrameHeaderSize + kFrameCrcSize) throw Error(Errc::Truncated, "frame shorter than header");

  ByteReader r(bytes);
  r.get<std::uint8_t>();
  Frame frame;
  const std::size_t len = r.get<std::uint8_t>();
  frame.header.seq = r.get<std::uint8_t>();
  frame.header.src = r.get<std::uint8_t>();
  frame.header.dst = r.get<std::uint8_t>();
  frame.header.msg_id = r.get<std::uint16_t>();
  frame.flags = r.get<std::uint8_t>();

  const std::size_t expected =
      kFrameHeaderSize + len + kFrameCrcSize + ((frame.flags & kFlagSigned) ? kSignatureSize : 0);
  if (bytes.size() < expected) {
    throw Error(Errc::Truncated, fmt::format("frame has {} of {} bytes", bytes.size(), expected));
  }
  if (bytes.size() > expected) {
    throw Error(Errc::BadLength, fmt::format("frame has {} trailing bytes", bytes.size() - expected));
  }

  const auto payload = r.get_bytes(len);
  frame.payload.assign(payload.begin(), payload.end());
  const auto crc = r.get<std::uint16_t>();
  const auto computed = crc16(bytes.subspan(1, kFrameHeaderSize - 1 + len));
  if (crc != computed) {
    throw Error(Errc::BadCrc, fmt::format("crc 0x{:04x} != computed 0x{:04x}", crc, computed));
  }
  if (frame.is_signed()) {
    FrameSignature sig;
    sig.counter = r.get_uint(kSignatureCounterSize);
    const auto tag = r.get_bytes(kSignatureTagSize);
    std::copy(tag.begin(), tag.end(), sig.tag.begin());
    frame.signature = sig;
  }
  return frame;
}

Frame FrameVerifier::decode(ByteView bytes) {
  Frame frame = parse_frame(bytes);
  const auto src = frame.header.src;
  if (!frame.is_signed()) {
    if (require_signed_) throw Error(Errc::BadSignature, "unsigned frame on a link that requires signing");
    return frame;
  }
  const auto key = keys_.find(src);
  if (key == keys_.end()) throw Error(Errc::BadSignature, fmt::format("no key for source 0x{:02x}", src));
  const std::size_t signed_len = bytes.size() - kSignatureTagSize;
  const auto expected = signature_tag(bytes.subspan(0, signed_len), key->second);
  if (sodium_memcmp(expected.data(), frame.signature->tag.data(), kSignatureTagSize) != 0) {
    throw Error(Errc::BadSignature, "signature tag mismatch");
  }
  const auto last = last_counter_.find(src);
  if (last != last_counter_.end() && frame.signature->counter <= last->second) {
    throw Error(Errc::ReplayDetected,
                fmt::format("counter {} <= last accepted {}", frame.signature->counter, last->second));
  }
  last_counter_[src] = frame.signature->counter;
  return frame;
}

std::optional<std::uint64_t> FrameVerifier::last_counter(std::uint8_t src) const {
  auto it = last_counter_.find(src);
  if (it == last_counter_.end()) return std::nullopt;
  return it->second;
}

}  // namespace seedsim::protocol
