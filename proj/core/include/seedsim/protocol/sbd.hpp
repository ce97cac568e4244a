#pragma once

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "seedsim/protocol/bytes.hpp"

namespace seedsim::protocol {

inline constexpr std::size_t kSbdRecordSize = 24;
inline constexpr std::size_t kIridiumMaxPayload = 340;
inline constexpr std::uint8_t kSbdVersion = 1;
static_assert(kSbdRecordSize <= kIridiumMaxPayload);

// SbdRecord.flags
inline constexpr std::uint8_t kSbdFlagGpsValid = 0x01;
inline constexpr std::uint8_t kSbdFlagLatchesSet = 0x02;
inline constexpr std::uint8_t kSbdFlagHighSpin = 0x04;
inline constexpr std::uint8_t kSbdFlagTestMode = 0x08;

/// Raw-struct Iridium record. Packed little-endian:
///   0 version u8 | 1 seed_id u8 | 2 counter u16 | 4 lat i32 (1e-7 deg) | 8 lon i32 (1e-7 deg)
///  12 alt i32 (mm) | 16 vz i16 (cm/s) | 18 phase u8 | 19 v_bat1 u16 (mV) | 21 v_bat2 u16 (mV) | 23 flags u8
struct SbdRecord {
  std::uint8_t version = kSbdVersion;
  std::uint8_t seed_id = 0;
  std::uint16_t counter = 0;
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  std::int32_t alt_mm = 0;
  std::int16_t vz_cms = 0;
  std::uint8_t phase = 0;
  std::uint16_t v_bat1_mv = 0;
  std::uint16_t v_bat2_mv = 0;
  std::uint8_t flags = 0;

  bool operator==(const SbdRecord&) const = default;
};

std::array<std::uint8_t, kSbdRecordSize> encode_sbd(const SbdRecord& record);
/// Dispatches on the version byte: WrongLength, UnknownVersion.
SbdRecord decode_sbd(ByteView bytes);
/// Self-describing form: {field: {"value": scaled, "unit": ...}} using the record's fixed scales.
nlohmann::json normalize_sbd(const SbdRecord& record);

// Backend SBD TCP wire format: magic u16 LE = 0x5344, length u16 LE, payload.
inline constexpr std::uint16_t kSbdTcpMagic = 0x5344;
inline constexpr std::size_t kSbdTcpHeaderSize = 4;

Bytes wrap_sbd_tcp(ByteView payload);

}  // namespace seedsim::protocol
