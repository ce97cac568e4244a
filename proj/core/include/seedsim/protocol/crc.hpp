#pragma once

#include <cstdint>

#include "seedsim/protocol/bytes.hpp"

namespace seedsim::protocol {

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
std::uint16_t crc16(ByteView bytes, std::uint16_t init = 0xFFFF) noexcept;

/// CRC-8/SMBUS: poly 0x07, init 0x00. Used for flash records.
std::uint8_t crc8(ByteView bytes) noexcept;

}  // namespace seedsim::protocol
