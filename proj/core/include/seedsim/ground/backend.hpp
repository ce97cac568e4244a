#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/ground/prediction.hpp"
#include "seedsim/ground/store.hpp"
#include "seedsim/protocol/bytes.hpp"
#include "seedsim/protocol/frame.hpp"
#include "seedsim/protocol/schema.hpp"

namespace seedsim::ground {

enum class CommandType : std::uint8_t { Ping = 0, RequestRadioSilence = 1, ReEnableBatteries = 2, SetTestMode = 3 };
const char* to_string(CommandType c);
std::optional<CommandType> command_from_string(std::string_view name);

enum class AckState { Pending, Acked, TimedOut };
const char* to_string(AckState s);

// command_ack.status
inline constexpr std::uint8_t kAckOk = 0;
inline constexpr std::uint8_t kAckRejected = 1;

struct CommandRequest {
  std::uint16_t id = 0;
  CommandType command = CommandType::Ping;
  std::uint8_t target = 0;
  std::string issued_by;
  AckState state = AckState::Pending;
  double issued_at_s = 0.0;
  std::optional<double> acked_at_s;
  int acks_expected = 1;
  std::vector<std::string> ack_origins;
  std::vector<std::uint8_t> ack_status;

  std::optional<double> round_trip_s() const;
  nlohmann::json to_json() const;
};

/// Wall or simulated time in seconds since the Unix epoch.
using ClockFn = std::function<double()>;
std::string iso8601(double unix_seconds);

struct BackendConfig {
  std::optional<std::filesystem::path> store_path;
  FsyncPolicy fsync = FsyncPolicy::PerBatch;
  protocol::CodecSet schema = protocol::CodecSet::builtin();
  PredictorParams predictor;
  double command_timeout_s = 10.0;
  protocol::LinkKey uplink_key;
  ClockFn clock;  // defaults to the system clock
  double fix_period_s = 1.0;  // seed_status counter period
};

class Backend {
 public:
  explicit Backend(BackendConfig config = {});

  IngestRecord ingest_frame(protocol::ByteView bytes, Channel channel);
  /// One SBD payload (the bytes inside the TCP wrapper).
  IngestRecord ingest_sbd(protocol::ByteView payload, Channel channel = Channel::Iridium);
  /// LoRa recovery beacon heard by a ground receiver in test setups.
  IngestRecord ingest_beacon(protocol::ByteView bytes, std::optional<double> rssi_dbm = std::nullopt);
  IngestRecord quarantine(Channel channel, std::string_view error, protocol::ByteView raw, std::string origin = "unknown");

  std::vector<IngestRecord> records(std::uint64_t since = 0, std::size_t limit = SIZE_MAX) const;
  std::optional<LandingPrediction> prediction(std::uint8_t seed_id) const;
  StreamHub& stream() { return hub_; }
  nlohmann::json health() const;
  const RecordStore& store() const { return store_; }
  const protocol::CodecSet& schema() const { return config_.schema; }

  /// Destination for encoded uplink frames.
  void set_uplink(std::function<void(protocol::Bytes)> uplink);
  /// PhaseError once the seeds are known to be ejected.
  CommandRequest dispatch_command(CommandType command, std::uint8_t target, std::string issued_by = "operator");
  /// Moves overdue pending commands to TimedOut.
  void poll_timeouts();
  std::vector<CommandRequest> commands() const;
  std::optional<CommandRequest> command(std::uint16_t id) const;
  bool ejected() const;

  double now() const;

 private:
  IngestRecord commit(IngestRecord r);
  void on_seed_status(std::uint8_t seed_id, const nlohmann::json& values);
  void on_rbc_status(const nlohmann::json& values);
  void on_ack(const nlohmann::json& values, const std::string& origin);

  BackendConfig config_;
  RecordStore store_;
  StreamHub hub_;
  mutable std::recursive_mutex mu_;
  std::function<void(protocol::Bytes)> uplink_;
  std::map<std::uint16_t, CommandRequest> commands_;
  std::uint16_t next_command_id_ = 1;
  std::uint8_t uplink_seq_ = 0;
  std::uint64_t last_counter_ = 0;
  bool ejected_ = false;
  std::map<std::uint8_t, std::vector<GpsPoint>> fixes_;
  std::map<std::uint8_t, LandingPrediction> predictions_;
};

}  // namespace seedsim::ground
