#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "seedsim/flight/sensors.hpp"
#include "seedsim/flight/trajectory.hpp"
#include "seedsim/power/power_system.hpp"
#include "seedsim/protocol/bytes.hpp"

namespace seedsim::flight {

/// One 250 Hz record.  Layout and byte offsets are listed in docs/flash-log.md.
struct FlashRecord {
  std::uint64_t time_us = 0;
  std::uint32_t sequence = 0;
  MissionPhase phase = MissionPhase::PreLaunch;
  std::uint8_t flags = 0;  // bit0 gps valid, bit1 baro precise valid, bit2/3 accel precise/highload saturated
  std::array<float, 3> accel_precise{};
  std::array<float, 3> accel_highload{};
  std::array<float, 3> gyro{};
  float baro_precise = 0.0f;
  float baro_wide = 0.0f;
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  std::int32_t alt_mm = 0;
  float tachometer = 0.0f;
  float v_bus = 0.0f;
  float v_bat1 = 0.0f;
  float v_bat2 = 0.0f;
  float v_rxsm = 0.0f;
  float i_bat1 = 0.0f;
  float i_bat2 = 0.0f;
  float i_rxsm = 0.0f;
  std::uint8_t conducting = 0;
  std::uint8_t latches = 0;  // bit0 q1, bit1 q2
  float rotor_setpoint = 0.0f;
  float servo_current = 0.0f;

  bool operator==(const FlashRecord&) const = default;
};

enum FlashFlags : std::uint8_t {
  kFlashGpsValid = 1,
  kFlashBaroPreciseValid = 2,
  kFlashAccelPreciseSat = 4,
  kFlashAccelHighloadSat = 8,
};

constexpr std::size_t kFlashRecordSize = 116;
constexpr std::size_t kFlashHeaderSize = 8;
constexpr std::uint16_t kFlashVersion = 1;

FlashRecord make_flash_record(std::uint64_t time_us, std::uint32_t sequence, MissionPhase phase,
                              const SensorSample& sample, const power::PowerBusState& bus, double rotor_setpoint,
                              double servo_current);

std::array<std::uint8_t, kFlashRecordSize> encode_flash_record(const FlashRecord& r);
/// CorruptRecord on checksum mismatch, WrongLength on size.
FlashRecord decode_flash_record(protocol::ByteView bytes);

protocol::Bytes flash_header();

/// Appends records to the primary file and its mirror; optionally keeps them in memory.
class FlashLogWriter {
 public:
  FlashLogWriter() = default;
  FlashLogWriter(const std::filesystem::path& primary, const std::filesystem::path& mirror);

  void set_keep_in_memory(bool keep) { keep_ = keep; }
  /// SequenceGap unless sequence == previous + 1 and time strictly increases.
  void append(const FlashRecord& r);
  void flush();

  const std::vector<FlashRecord>& records() const { return memory_; }
  std::uint64_t count() const { return count_; }
  std::optional<std::uint32_t> last_sequence() const { return last_seq_; }

 private:
  std::ofstream primary_;
  std::ofstream mirror_;
  bool keep_ = true;
  std::vector<FlashRecord> memory_;
  std::uint64_t count_ = 0;
  std::optional<std::uint32_t> last_seq_;
  std::uint64_t last_time_ = 0;
};

struct ExtractIssue {
  std::size_t index;  // record slot in the file
  std::string copy;   // "primary" or "mirror"
  std::string error;
};

struct ExtractResult {
  std::vector<FlashRecord> records;
  std::vector<ExtractIssue> issues;
  std::size_t recovered_from_mirror = 0;
  std::size_t lost = 0;
  std::size_t gaps = 0;
};

/// Reads the primary copy, recovering any corrupt slot from the mirror if given.
ExtractResult extract_log(const std::filesystem::path& primary,
                          const std::optional<std::filesystem::path>& mirror = std::nullopt);
ExtractResult extract_log_bytes(protocol::ByteView primary, std::optional<protocol::ByteView> mirror = std::nullopt);

std::filesystem::path mirror_path(const std::filesystem::path& primary);

std::string flash_csv_header();
std::string flash_csv_row(const FlashRecord& r);

}  // namespace seedsim::flight
