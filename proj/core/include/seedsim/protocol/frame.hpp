#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>

#include "seedsim/protocol/bytes.hpp"

namespace seedsim::protocol {

inline constexpr std::uint8_t kFrameSync = 0xD2;
inline constexpr std::uint8_t kFlagSigned = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 8;   // sync .. flags
inline constexpr std::size_t kFrameCrcSize = 2;
inline constexpr std::size_t kSignatureCounterSize = 6;
inline constexpr std::size_t kSignatureTagSize = 6;
inline constexpr std::size_t kSignatureSize = kSignatureCounterSize + kSignatureTagSize;
inline constexpr std::size_t kMaxFramePayload = 255;
inline constexpr std::uint64_t kMaxSignatureCounter = (std::uint64_t{1} << 48) - 1;

struct FrameHeader {
  std::uint8_t seq = 0;
  std::uint8_t src = 0;
  std::uint8_t dst = 0xFF;
  std::uint16_t msg_id = 0;
};

struct FrameSignature {
  std::uint64_t counter = 0;  // 48 bit
  std::array<std::uint8_t, kSignatureTagSize> tag{};
  bool operator==(const FrameSignature&) const = default;
};

struct Frame {
  FrameHeader header;
  std::uint8_t flags = 0;
  Bytes payload;
  std::optional<FrameSignature> signature;

  bool is_signed() const { return (flags & kFlagSigned) != 0; }
  bool operator==(const Frame& other) const {
    return header.seq == other.header.seq && header.src == other.header.src &&
           header.dst == other.header.dst && header.msg_id == other.header.msg_id && flags == other.flags &&
           payload == other.payload && signature == other.signature;
  }
};

using LinkKey = Bytes;

struct SigningParams {
  const LinkKey& key;
  std::uint64_t counter;
};

/// Serialises a frame; with `signing` set, the signed flag is raised and a 48-bit counter
/// plus a 6-byte truncated HMAC-SHA256 tag over the preceding frame bytes are appended.
/// Throws BadLength when payload exceeds 255 bytes or the counter exceeds 48 bits.
Bytes encode_frame(const FrameHeader& header, ByteView payload, std::optional<SigningParams> signing = std::nullopt);

/// Structural parse and CRC check only: BadSync, Truncated, BadLength, BadCrc. No authentication.
Frame parse_frame(ByteView bytes);

std::array<std::uint8_t, kSignatureTagSize> signature_tag(ByteView signed_bytes, const LinkKey& key);

/// Per-link receive side: CRC, then signature, then replay counter, in that order.
/// Replay state is tracked per source address.
class FrameVerifier {
 public:
  explicit FrameVerifier(bool require_signed = false) : require_signed_(require_signed) {}

  void set_key(std::uint8_t src, LinkKey key) { keys_[src] = std::move(key); }
  void set_require_signed(bool require) { require_signed_ = require; }
  bool require_signed() const { return require_signed_; }

  /// Throws BadSync/Truncated/BadLength/BadCrc/BadSignature/ReplayDetected.
  Frame decode(ByteView bytes);

  std::optional<std::uint64_t> last_counter(std::uint8_t src) const;

 private:
  bool require_signed_;
  std::map<std::uint8_t, LinkKey> keys_;
  std::map<std::uint8_t, std::uint64_t> last_counter_;
};

}  // namespace seedsim::protocol
