#include "seedsim/protocol/beacon.hpp"

#include "seedsim/protocol/crc.hpp"

namespace seedsim::protocol {

std::array<std::uint8_t, kBeaconSize> encode_beacon(const BeaconMessage& beacon) {
  Bytes out;
  out.reserve(kBeaconSize);
  ByteWriter w(out);
  w.put(beacon.seed_id);
  w.put<std::uint8_t>(beacon.has_fix ? 1 : 0);
  w.put<std::int32_t>(beacon.has_fix ? beacon.lat_e7 : 0);
  w.put<std::int32_t>(beacon.has_fix ? beacon.lon_e7 : 0);
  w.put<std::int32_t>(beacon.has_fix ? beacon.alt_mm : 0);
  w.put(beacon.counter);
  w.put(crc16(out));
  std::array<std::uint8_t, kBeaconSize> bytes{};
  std::copy(out.begin(), out.end(), bytes.begin());
  return bytes;
}

BeaconMessage decode_beacon(ByteView bytes) {
  if (bytes.size() != kBeaconSize) throw Error(Errc::WrongLength, "beacon must be 18 bytes");
  if (crc16(bytes.subspan(0, kBeaconSize - 2)) !=
      static_cast<std::uint16_t>(bytes[kBeaconSize - 2] | (bytes[kBeaconSize - 1] << 8))) {
    throw Error(Errc::BadCrc, "beacon crc mismatch");
  }
  ByteReader r(bytes);
  BeaconMessage b;
  b.seed_id = r.get<std::uint8_t>();
  b.has_fix = (r.get<std::uint8_t>() & 0x01) != 0;
  b.lat_e7 = r.get<std::int32_t>();
  b.lon_e7 = r.get<std::int32_t>();
  b.alt_mm = r.get<std::int32_t>();
  b.counter = r.get<std::uint16_t>();
  if (!b.has_fix && (b.lat_e7 != 0 || b.lon_e7 != 0 || b.alt_mm != 0)) {
    throw Error(Errc::BadLength, "beacon without fix carries a position");
  }
  return b;
}

}  // namespace seedsim::protocol
