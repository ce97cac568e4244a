#include "seedsim/ground/backend.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>

#include "seedsim/error.hpp"
#include "seedsim/flight/trajectory.hpp"
#include "seedsim/kernel/node.hpp"
#include "seedsim/protocol/beacon.hpp"
#include "seedsim/protocol/sbd.hpp"

namespace seedsim::ground {

using nlohmann::json;
using protocol::ByteView;
using protocol::Bytes;

const char* to_string(CommandType c) {
  switch (c) {
    case CommandType::Ping: return "ping";
    case CommandType::RequestRadioSilence: return "request-radio-silence";
    case CommandType::ReEnableBatteries: return "re-enable-batteries";
    case CommandType::SetTestMode: return "set-test-mode";
  }
  return "?";
}

std::optional<CommandType> command_from_string(std::string_view name) {
  for (auto c : {CommandType::Ping, CommandType::RequestRadioSilence, CommandType::ReEnableBatteries,
                 CommandType::SetTestMode}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

const char* to_string(AckState s) {
  switch (s) {
    case AckState::Pending: return "pending";
    case AckState::Acked: return "acked";
    case AckState::TimedOut: return "timed-out";
  }
  return "?";
}

std::optional<double> CommandRequest::round_trip_s() const {
  if (!acked_at_s) return std::nullopt;
  return *acked_at_s - issued_at_s;
}

json CommandRequest::to_json() const {
  json j{{"id", id},
         {"command", to_string(command)},
         {"target", target},
         {"issued_by", issued_by},
         {"state", to_string(state)},
         {"issued_at", iso8601(issued_at_s)},
         {"acks", ack_origins}};
  if (auto rt = round_trip_s()) j["round_trip_s"] = *rt;
  return j;
}

std::string iso8601(double unix_seconds) {
  const auto whole = static_cast<std::time_t>(std::floor(unix_seconds));
  const auto micros = static_cast<long>(std::llround((unix_seconds - double(whole)) * 1e6));
  std::tm tm{};
  gmtime_r(&whole, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:06}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, std::min(micros, 999999L));
}

namespace {

std::string origin_name(std::uint8_t address) {
  if (auto n = kernel::NodeId::from_address(address)) return n->name();
  return fmt::format("0x{:02x}", address);
}

std::optional<std::uint8_t> seed_of(std::string_view origin) {
  if (origin == "sbc1" || origin == "cop1" || origin == "1" || origin == "seed1") return 1;
  if (origin == "sbc2" || origin == "cop2" || origin == "2" || origin == "seed2") return 2;
  return std::nullopt;
}

}  // namespace

Backend::Backend(BackendConfig config) : config_(std::move(config)), store_(config_.store_path, config_.fsync) {
  if (!config_.clock) {
    config_.clock = [] {
      return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
    };
  }
}

double Backend::now() const { return config_.clock(); }

IngestRecord Backend::commit(IngestRecord r) {
  store_.append(r);
  hub_.publish(r);
  return r;
}

IngestRecord Backend::quarantine(Channel channel, std::string_view error, ByteView raw, std::string origin) {
  std::lock_guard lock(mu_);
  IngestRecord r;
  r.receive_time = iso8601(now());
  r.channel = channel;
  r.origin = std::move(origin);
  r.message = "quarantine";
  r.raw = protocol::to_hex(raw);
  r.error = std::string(error);
  return commit(std::move(r));
}

IngestRecord Backend::ingest_frame(ByteView bytes, Channel channel) {
  std::lock_guard lock(mu_);
  protocol::Frame frame;
  try {
    frame = protocol::parse_frame(bytes);
  } catch (const Error& e) {
    return quarantine(channel, to_string(e.code()), bytes);
  }
  const std::string origin = origin_name(frame.header.src);
  const auto* codec = config_.schema.find(frame.header.msg_id);
  if (codec == nullptr) return quarantine(channel, to_string(Errc::UnknownMessage), bytes, origin);

  json values;
  IngestRecord r;
  try {
    values = codec->decode(frame.payload);
    r.fields = codec->normalize(frame.payload);
  } catch (const Error& e) {
    return quarantine(channel, to_string(e.code()), bytes, origin);
  }
  r.receive_time = iso8601(now());
  r.channel = channel;
  r.origin = origin;
  r.message = codec->name();
  r.raw = protocol::to_hex(bytes);
  IngestRecord out = commit(std::move(r));

  if (codec->name() == "seed_status") {
    on_seed_status(values.at("seed_id").get<std::uint8_t>(), values);
  } else if (codec->name() == "rbc_status") {
    on_rbc_status(values);
  } else if (codec->name() == "command_ack") {
    on_ack(values, origin);
  }
  return out;
}

IngestRecord Backend::ingest_sbd(ByteView payload, Channel channel) {
  std::lock_guard lock(mu_);
  protocol::SbdRecord rec;
  try {
    rec = protocol::decode_sbd(payload);
  } catch (const Error& e) {
    return quarantine(channel, to_string(e.code()), payload);
  }
  const auto& codec = config_.schema.by_name("seed_status");
  IngestRecord r;
  r.receive_time = iso8601(now());
  r.channel = channel;
  r.origin = kernel::NodeId::sbc(kernel::seed_unit(rec.seed_id == 2 ? 1 : 0)).name();
  r.message = codec.name();
  r.fields = codec.normalize(payload);
  r.raw = protocol::to_hex(payload);
  IngestRecord out = commit(std::move(r));
  on_seed_status(rec.seed_id, codec.decode(payload));
  return out;
}

IngestRecord Backend::ingest_beacon(ByteView bytes, std::optional<double> rssi_dbm) {
  std::lock_guard lock(mu_);
  protocol::BeaconMessage b;
  try {
    b = protocol::decode_beacon(bytes);
  } catch (const Error& e) {
    return quarantine(Channel::LoraTest, to_string(e.code()), bytes);
  }
  IngestRecord r;
  r.receive_time = iso8601(now());
  r.channel = Channel::LoraTest;
  r.origin = kernel::NodeId::sbc(kernel::seed_unit(b.seed_id == 2 ? 1 : 0)).name();
  r.message = "beacon";
  r.fields = {{"seed_id", {{"value", b.seed_id}, {"unit", ""}}},
              {"has_fix", {{"value", b.has_fix}, {"unit", ""}}},
              {"lat", {{"value", b.lat_e7 * 1e-7}, {"unit", "deg"}}},
              {"lon", {{"value", b.lon_e7 * 1e-7}, {"unit", "deg"}}},
              {"alt", {{"value", b.alt_mm * 1e-3}, {"unit", "m"}}},
              {"counter", {{"value", b.counter}, {"unit", ""}}}};
  if (rssi_dbm) r.fields["rssi"] = {{"value", *rssi_dbm}, {"unit", "dBm"}};
  r.raw = protocol::to_hex(bytes);
  return commit(std::move(r));
}

void Backend::on_seed_status(std::uint8_t seed_id, const json& v) {
  const auto phase = v.at("phase").get<int>();
  if (phase >= static_cast<int>(flight::MissionPhase::Ejection) && phase <= 5) ejected_ = true;
  if (phase != static_cast<int>(flight::MissionPhase::Descent)) return;
  if ((v.at("flags").get<int>() & protocol::kSbdFlagGpsValid) == 0) return;

  GpsPoint p;
  p.t_s = v.at("counter").get<double>() * config_.fix_period_s;
  p.lat_deg = v.at("lat").get<double>() * 1e-7;
  p.lon_deg = v.at("lon").get<double>() * 1e-7;
  p.alt_m = v.at("alt").get<double>() * 1e-3;
  auto& hist = fixes_[seed_id];
  // The same status may arrive on two channels; keep one fix per counter.
  for (const auto& q : hist) {
    if (q.t_s == p.t_s) return;
  }
  hist.push_back(p);
  std::sort(hist.begin(), hist.end(), [](const GpsPoint& a, const GpsPoint& b) { return a.t_s < b.t_s; });
  try {
    predictions_[seed_id] = predict_landing(hist, config_.predictor);
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientData) throw;
  }
}

void Backend::on_rbc_status(const json& v) {
  if (v.at("seeds_attached").get<int>() == 0) ejected_ = true;
}

void Backend::on_ack(const json& v, const std::string& origin) {
  const auto id = v.at("command_id").get<std::uint16_t>();
  auto it = commands_.find(id);
  if (it == commands_.end()) return;
  auto& c = it->second;
  if (c.state != AckState::Pending) return;
  if (std::find(c.ack_origins.begin(), c.ack_origins.end(), origin) != c.ack_origins.end()) return;
  c.ack_origins.push_back(origin);
  c.ack_status.push_back(v.at("status").get<std::uint8_t>());
  if (static_cast<int>(c.ack_origins.size()) >= c.acks_expected) {
    c.state = AckState::Acked;
    c.acked_at_s = now();
  }
}

std::vector<IngestRecord> Backend::records(std::uint64_t since, std::size_t limit) const {
  return store_.since(since, limit);
}

std::optional<LandingPrediction> Backend::prediction(std::uint8_t seed_id) const {
  std::lock_guard lock(mu_);
  auto it = predictions_.find(seed_id);
  if (it == predictions_.end()) return std::nullopt;
  return it->second;
}

json Backend::health() const {
  std::lock_guard lock(mu_);
  return {{"status", "ok"},
          {"records", store_.last_seq()},
          {"subscribers", hub_.subscribers()},
          {"ejected", ejected_},
          {"schema_version", config_.schema.version()},
          {"time", iso8601(now())}};
}

void Backend::set_uplink(std::function<void(Bytes)> uplink) {
  std::lock_guard lock(mu_);
  uplink_ = std::move(uplink);
}

bool Backend::ejected() const {
  std::lock_guard lock(mu_);
  return ejected_;
}

CommandRequest Backend::dispatch_command(CommandType command, std::uint8_t target, std::string issued_by) {
  std::lock_guard lock(mu_);
  if (ejected_) throw Error(Errc::PhaseError, fmt::format("{} rejected: seeds ejected", to_string(command)));
  const bool seed_target = target == kernel::kAddressBroadcast || seed_of(origin_name(target)).has_value();
  if (!seed_target && target != kernel::kAddressRbc) {
    throw Error(Errc::ScenarioError, fmt::format("command target 0x{:02x} is not addressable", target));
  }

  CommandRequest req;
  req.id = next_command_id_++;
  req.command = command;
  req.target = target;
  req.issued_by = std::move(issued_by);
  req.issued_at_s = now();
  req.acks_expected = target == kernel::kAddressBroadcast ? 2 : 1;

  const auto& codec = config_.schema.by_name("telecommand");
  const Bytes payload = codec.encode({{"command_id", req.id},
                                      {"command", static_cast<int>(command)},
                                      {"target", target},
                                      {"issued_at", static_cast<std::uint32_t>(std::fmod(req.issued_at_s * 1e3, 4294967296.0))}});
  protocol::FrameHeader h;
  h.seq = uplink_seq_++;
  h.src = kernel::kAddressGround;
  h.dst = kernel::kAddressRbc;
  h.msg_id = codec.id();
  const auto counter = std::max<std::uint64_t>(last_counter_ + 1, static_cast<std::uint64_t>(req.issued_at_s * 1e3));
  last_counter_ = counter;
  Bytes frame = protocol::encode_frame(h, payload, protocol::SigningParams{config_.uplink_key, counter});
  commands_[req.id] = req;
  if (uplink_) uplink_(std::move(frame));
  return commands_[req.id];
}

void Backend::poll_timeouts() {
  std::lock_guard lock(mu_);
  const double t = now();
  for (auto& [id, c] : commands_) {
    if (c.state == AckState::Pending && t - c.issued_at_s >= config_.command_timeout_s) c.state = AckState::TimedOut;
  }
}

std::vector<CommandRequest> Backend::commands() const {
  std::lock_guard lock(mu_);
  std::vector<CommandRequest> out;
  for (const auto& [id, c] : commands_) out.push_back(c);
  return out;
}

std::optional<CommandRequest> Backend::command(std::uint16_t id) const {
  std::lock_guard lock(mu_);
  auto it = commands_.find(id);
  if (it == commands_.end()) return std::nullopt;
  return it->second;
}

}  // namespace seedsim::ground
