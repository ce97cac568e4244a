#include "seedsim/protocol/sbd.hpp"

#include <fmt/format.h>

namespace seedsim::protocol {

std::array<std::uint8_t, kSbdRecordSize> encode_sbd(const SbdRecord& rec) {
  Bytes out;
  out.reserve(kSbdRecordSize);
  ByteWriter w(out);
  w.put(rec.version);
  w.put(rec.seed_id);
  w.put(rec.counter);
  w.put(rec.lat_e7);
  w.put(rec.lon_e7);
  w.put(rec.alt_mm);
  w.put(rec.vz_cms);
  w.put(rec.phase);
  w.put(rec.v_bat1_mv);
  w.put(rec.v_bat2_mv);
  w.put(rec.flags);
  std::array<std::uint8_t, kSbdRecordSize> bytes{};
  std::copy(out.begin(), out.end(), bytes.begin());
  return bytes;
}

SbdRecord decode_sbd(ByteView bytes) {
  if (bytes.empty()) throw Error(Errc::WrongLength, "empty SBD payload");
  if (bytes[0] != kSbdVersion) throw Error(Errc::UnknownVersion, fmt::format("SBD record version {}", bytes[0]));
  if (bytes.size() != kSbdRecordSize) {
    throw Error(Errc::WrongLength, fmt::format("SBD v1 record is {} bytes, got {}", kSbdRecordSize, bytes.size()));
  }
  ByteReader r(bytes);
  SbdRecord rec;
  rec.version = r.get<std::uint8_t>();
  rec.seed_id = r.get<std::uint8_t>();
  rec.counter = r.get<std::uint16_t>();
  rec.lat_e7 = r.get<std::int32_t>();
  rec.lon_e7 = r.get<std::int32_t>();
  rec.alt_mm = r.get<std::int32_t>();
  rec.vz_cms = r.get<std::int16_t>();
  rec.phase = r.get<std::uint8_t>();
  rec.v_bat1_mv = r.get<std::uint16_t>();
  rec.v_bat2_mv = r.get<std::uint16_t>();
  rec.flags = r.get<std::uint8_t>();
  return rec;
}

nlohmann::json normalize_sbd(const SbdRecord& rec) {
  using nlohmann::json;
  auto unit = [](json value, const char* u) { return json{{"value", std::move(value)}, {"unit", u}}; };
  auto plain = [](json value) { return json{{"value", std::move(value)}}; };
  json out = json::object();
  out["version"] = plain(std::uint64_t{rec.version});
  out["seed_id"] = plain(std::uint64_t{rec.seed_id});
  out["counter"] = plain(std::uint64_t{rec.counter});
  out["lat"] = unit(static_cast<double>(rec.lat_e7) * 1e-7, "deg");
  out["lon"] = unit(static_cast<double>(rec.lon_e7) * 1e-7, "deg");
  out["alt"] = unit(static_cast<double>(rec.alt_mm) * 1e-3, "m");
  out["vz"] = unit(static_cast<double>(rec.vz_cms) * 1e-2, "m/s");
  out["phase"] = plain(std::uint64_t{rec.phase});
  out["v_bat1"] = unit(static_cast<double>(rec.v_bat1_mv) * 1e-3, "V");
  out["v_bat2"] = unit(static_cast<double>(rec.v_bat2_mv) * 1e-3, "V");
  out["flags"] = plain(std::uint64_t{rec.flags});
  return out;
}

Bytes wrap_sbd_tcp(ByteView payload) {
  if (payload.size() > 0xFFFF) throw Error(Errc::PayloadTooLarge, "SBD payload exceeds u16 length");
  Bytes out;
  out.reserve(kSbdTcpHeaderSize + payload.size());
  ByteWriter w(out);
  w.put<std::uint16_t>(kSbdTcpMagic);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(payload.size()));
  w.put_bytes(payload);
  return out;
}

}  // namespace seedsim::protocol
