#pragma once

#include <array>
#include <cstdint>

#include "seedsim/protocol/bytes.hpp"

namespace seedsim::protocol {

inline constexpr std::size_t kBeaconSize = 18;

/// LoRa recovery beacon. Packed little-endian:
///   0 seed_id u8 | 1 flags u8 (bit0 has_fix) | 2 lat i32 | 6 lon i32 | 10 alt i32 | 14 counter u16 | 16 crc16
/// Without a fix the position fields are transmitted as zeros.
struct BeaconMessage {
  std::uint8_t seed_id = 0;
  bool has_fix = false;
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  std::int32_t alt_mm = 0;
  std::uint16_t counter = 0;

  bool operator==(const BeaconMessage&) const = default;
};

/// Zeroes the position when has_fix is false.
std::array<std::uint8_t, kBeaconSize> encode_beacon(const BeaconMessage& beacon);
/// WrongLength, BadCrc, and BadLength (position set without a fix).
BeaconMessage decode_beacon(ByteView bytes);

}  // namespace seedsim::protocol
