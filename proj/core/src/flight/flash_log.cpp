#include "seedsim/flight/flash_log.hpp"

#include <cmath>
#include <cstring>
#include <iterator>

#include <fmt/format.h>

#include "seedsim/error.hpp"
#include "seedsim/protocol/crc.hpp"

namespace seedsim::flight {

using protocol::ByteReader;
using protocol::ByteView;
using protocol::ByteWriter;
using protocol::Bytes;

namespace {
constexpr char kMagic[4] = {'S', 'S', 'F', 'L'};
constexpr std::size_t kPayloadSize = kFlashRecordSize - 1;
}  // namespace

FlashRecord make_flash_record(std::uint64_t time_us, std::uint32_t sequence, MissionPhase phase,
                              const SensorSample& s, const power::PowerBusState& bus, double rotor_setpoint,
                              double servo_current) {
  FlashRecord r;
  r.time_us = time_us;
  r.sequence = sequence;
  r.phase = phase;
  if (s.gps.valid) r.flags |= kFlashGpsValid;
  if (s.baro_precise_mbar) r.flags |= kFlashBaroPreciseValid;
  if (s.accel_precise_saturated) r.flags |= kFlashAccelPreciseSat;
  if (s.accel_highload_saturated) r.flags |= kFlashAccelHighloadSat;
  auto f3 = [](const Vec3& v) {
    return std::array<float, 3>{static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
  };
  r.accel_precise = f3(s.accel_precise);
  r.accel_highload = f3(s.accel_highload);
  r.gyro = f3(s.gyro_dps);
  r.baro_precise = static_cast<float>(s.baro_precise_mbar.value_or(0.0));
  r.baro_wide = static_cast<float>(s.baro_wide_mbar);
  if (s.gps.valid) {
    r.lat_e7 = static_cast<std::int32_t>(std::llround(s.gps.position.lat_deg * 1e7));
    r.lon_e7 = static_cast<std::int32_t>(std::llround(s.gps.position.lon_deg * 1e7));
    r.alt_mm = static_cast<std::int32_t>(std::llround(s.gps.position.alt_m * 1e3));
  }
  r.tachometer = static_cast<float>(s.tachometer_hz);
  r.v_bus = static_cast<float>(bus.bus_voltage);
  r.v_bat1 = static_cast<float>(bus.v_bat1);
  r.v_bat2 = static_cast<float>(bus.v_bat2);
  r.v_rxsm = static_cast<float>(bus.v_rxsm);
  r.i_bat1 = static_cast<float>(bus.i_bat1);
  r.i_bat2 = static_cast<float>(bus.i_bat2);
  r.i_rxsm = static_cast<float>(bus.i_rxsm);
  r.conducting = bus.conducting.bits();
  r.latches = static_cast<std::uint8_t>((bus.latch1 ? 1 : 0) | (bus.latch2 ? 2 : 0));
  r.rotor_setpoint = static_cast<float>(rotor_setpoint);
  r.servo_current = static_cast<float>(servo_current);
  return r;
}

std::array<std::uint8_t, kFlashRecordSize> encode_flash_record(const FlashRecord& r) {
  Bytes b;
  b.reserve(kFlashRecordSize);
  ByteWriter w(b);
  w.put(r.time_us);
  w.put(r.sequence);
  w.put(static_cast<std::uint8_t>(r.phase));
  w.put(r.flags);
  for (float v : r.accel_precise) w.put_f32(v);
  for (float v : r.accel_highload) w.put_f32(v);
  for (float v : r.gyro) w.put_f32(v);
  w.put_f32(r.baro_precise);
  w.put_f32(r.baro_wide);
  w.put(r.lat_e7);
  w.put(r.lon_e7);
  w.put(r.alt_mm);
  w.put_f32(r.tachometer);
  for (float v : {r.v_bus, r.v_bat1, r.v_bat2, r.v_rxsm, r.i_bat1, r.i_bat2, r.i_rxsm}) w.put_f32(v);
  w.put(r.conducting);
  w.put(r.latches);
  w.put_f32(r.rotor_setpoint);
  w.put_f32(r.servo_current);
  while (b.size() < kPayloadSize) b.push_back(0);
  b.push_back(protocol::crc8(b));
  std::array<std::uint8_t, kFlashRecordSize> out{};
  std::memcpy(out.data(), b.data(), kFlashRecordSize);
  return out;
}

FlashRecord decode_flash_record(ByteView bytes) {
  if (bytes.size() != kFlashRecordSize) {
    throw Error(Errc::WrongLength, fmt::format("flash record is {} bytes, expected {}", bytes.size(), kFlashRecordSize));
  }
  if (protocol::crc8(bytes.first(kPayloadSize)) != bytes[kPayloadSize]) {
    throw Error(Errc::CorruptRecord, "flash record checksum mismatch");
  }
  ByteReader rd(bytes);
  FlashRecord r;
  r.time_us = rd.get<std::uint64_t>();
  r.sequence = rd.get<std::uint32_t>();
  const auto phase = rd.get<std::uint8_t>();
  if (phase > 5) throw Error(Errc::CorruptRecord, "flash record phase out of range");
  r.phase = static_cast<MissionPhase>(phase);
  r.flags = rd.get<std::uint8_t>();
  for (float& v : r.accel_precise) v = rd.get_f32();
  for (float& v : r.accel_highload) v = rd.get_f32();
  for (float& v : r.gyro) v = rd.get_f32();
  r.baro_precise = rd.get_f32();
  r.baro_wide = rd.get_f32();
  r.lat_e7 = rd.get<std::int32_t>();
  r.lon_e7 = rd.get<std::int32_t>();
  r.alt_mm = rd.get<std::int32_t>();
  r.tachometer = rd.get_f32();
  for (float* v : {&r.v_bus, &r.v_bat1, &r.v_bat2, &r.v_rxsm, &r.i_bat1, &r.i_bat2, &r.i_rxsm}) *v = rd.get_f32();
  r.conducting = rd.get<std::uint8_t>();
  r.latches = rd.get<std::uint8_t>();
  r.rotor_setpoint = rd.get_f32();
  r.servo_current = rd.get_f32();
  return r;
}

Bytes flash_header() {
  Bytes b(std::begin(kMagic), std::end(kMagic));
  ByteWriter w(b);
  w.put(kFlashVersion);
  w.put(static_cast<std::uint16_t>(kFlashRecordSize));
  return b;
}

std::filesystem::path mirror_path(const std::filesystem::path& primary) {
  auto p = primary;
  p += ".mirror";
  return p;
}

FlashLogWriter::FlashLogWriter(const std::filesystem::path& primary, const std::filesystem::path& mirror)
    : primary_(primary, std::ios::binary | std::ios::trunc), mirror_(mirror, std::ios::binary | std::ios::trunc) {
  if (!primary_ || !mirror_) throw Error(Errc::ScenarioError, "cannot open flash log files");
  const Bytes h = flash_header();
  for (auto* f : {&primary_, &mirror_}) f->write(reinterpret_cast<const char*>(h.data()), std::streamsize(h.size()));
}

void FlashLogWriter::append(const FlashRecord& r) {
  if (last_seq_ && (r.sequence != *last_seq_ + 1 || r.time_us <= last_time_)) {
    throw Error(Errc::SequenceGap, fmt::format("flash record {} after {}", r.sequence, *last_seq_));
  }
  last_seq_ = r.sequence;
  last_time_ = r.time_us;
  ++count_;
  if (primary_.is_open()) {
    const auto bytes = encode_flash_record(r);
    for (auto* f : {&primary_, &mirror_}) {
      f->write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
  }
  if (keep_) memory_.push_back(r);
}

void FlashLogWriter::flush() {
  if (primary_.is_open()) {
    primary_.flush();
    mirror_.flush();
  }
}

namespace {

Bytes read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, fmt::format("cannot open {}", p.string()));
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::size_t check_header(ByteView file, const char* copy) {
  const Bytes h = flash_header();
  if (file.size() < h.size() || !std::equal(h.begin(), h.end(), file.begin())) {
    throw Error(Errc::CorruptRecord, fmt::format("{} copy has a bad header", copy));
  }
  return (file.size() - h.size()) / kFlashRecordSize;
}

}  // namespace

ExtractResult extract_log_bytes(ByteView primary, std::optional<ByteView> mirror) {
  ExtractResult out;
  std::size_t n = check_header(primary, "primary");
  std::size_t n_mirror = 0;
  if (mirror) n_mirror = check_header(*mirror, "mirror");
  const std::size_t slots = std::max(n, n_mirror);

  auto slot = [](ByteView file, std::size_t i) { return file.subspan(kFlashHeaderSize + i * kFlashRecordSize, kFlashRecordSize); };

  std::optional<std::uint32_t> prev;
  for (std::size_t i = 0; i < slots; ++i) {
    std::optional<FlashRecord> rec;
    if (i < n) {
      try {
        rec = decode_flash_record(slot(primary, i));
      } catch (const Error& e) {
        out.issues.push_back({i, "primary", e.what()});
      }
    } else {
      out.issues.push_back({i, "primary", "missing"});
    }
    if (!rec && mirror && i < n_mirror) {
      try {
        rec = decode_flash_record(slot(*mirror, i));
        ++out.recovered_from_mirror;
      } catch (const Error& e) {
        out.issues.push_back({i, "mirror", e.what()});
      }
    }
    if (!rec) {
      ++out.lost;
      continue;
    }
    if (prev && rec->sequence != *prev + 1) ++out.gaps;
    prev = rec->sequence;
    out.records.push_back(*rec);
  }
  return out;
}

ExtractResult extract_log(const std::filesystem::path& primary, const std::optional<std::filesystem::path>& mirror) {
  const Bytes p = read_file(primary);
  if (!mirror) return extract_log_bytes(p);
  const Bytes m = read_file(*mirror);
  return extract_log_bytes(p, ByteView(m));
}

std::string flash_csv_header() {
  return "time_us,sequence,phase,flags,ax,ay,az,hx,hy,hz,gx,gy,gz,baro_precise,baro_wide,lat_e7,lon_e7,alt_mm,"
         "tachometer,v_bus,v_bat1,v_bat2,v_rxsm,i_bat1,i_bat2,i_rxsm,conducting,latches,rotor_setpoint,servo_current";
}

std::string flash_csv_row(const FlashRecord& r) {
  return fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.time_us, r.sequence,
      to_string(r.phase), r.flags, r.accel_precise[0], r.accel_precise[1], r.accel_precise[2], r.accel_highload[0],
      r.accel_highload[1], r.accel_highload[2], r.gyro[0], r.gyro[1], r.gyro[2], r.baro_precise, r.baro_wide, r.lat_e7,
      r.lon_e7, r.alt_mm, r.tachometer, r.v_bus, r.v_bat1, r.v_bat2, r.v_rxsm, r.i_bat1, r.i_bat2, r.i_rxsm,
      r.conducting, r.latches, r.rotor_setpoint, r.servo_current);
}

}  // namespace seedsim::flight
