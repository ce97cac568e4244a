#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/flight/flash_log.hpp"
#include "seedsim/flight/trajectory.hpp"
#include "seedsim/ground/backend.hpp"
#include "seedsim/kernel/simulator.hpp"
#include "seedsim/mission/scenario.hpp"
#include "seedsim/power/radio_silence.hpp"
#include "seedsim/transport/can_bus.hpp"
#include "seedsim/transport/umbilical.hpp"

namespace seedsim::mission {

struct MissionOptions {
  /// Flash logs, power CSV, ground record store and trace CSV are written here when set.
  std::optional<std::filesystem::path> out_dir;
  bool keep_flash = false;
  /// Power trace keeps every Nth tick plus every tick where the conducting set, latches or
  /// powered state change.
  int power_trace_every = 25;
  bool keep_trace_entries = false;
};

struct CanProbe {
  double time_s = 0.0;
  transport::TxStatus status = transport::TxStatus::Queued;
};

struct ActionLog {
  double time_s = 0.0;
  std::string kind;
  std::string outcome;
};

/// A seed_status payload as published by an SBC.
struct StatusSample {
  double time_s = 0.0;
  std::uint16_t counter = 0;
  protocol::Bytes payload;
};

/// One complete scenario: RBC, two seeds (SBC + COP each), ground backend and recovery receiver
/// wired through the middleware and transports on a single simulator timeline.
class Mission {
 public:
  explicit Mission(Scenario scenario, MissionOptions options = {});
  ~Mission();
  Mission(const Mission&) = delete;
  Mission& operator=(const Mission&) = delete;

  /// Runs to min(t_s, duration). Returns the trace digest.
  std::string run_until(double t_s);
  std::string run();

  const Scenario& scenario() const;
  kernel::Simulator& sim();
  const kernel::Simulator& sim() const;
  ground::Backend& backend();
  const transport::CanBus& can() const;
  const transport::Umbilical& umbilical() const;

  const power::PowerSystem& power(int seed) const;
  const std::vector<power::PowerBusState>& power_trace(int seed) const;
  const std::vector<flight::FlashRecord>& flash(int seed) const;
  const flight::TrajectoryState& trajectory(int seed) const;
  flight::MissionPhase phase(int seed) const;
  /// Radio-silence trace of the last procedure started on this seed, if any.
  const power::StateTrace* silence_trace(int seed) const;
  /// Ticks with a latch set while that string carried current.
  std::uint64_t silence_violations(int seed) const;
  const std::vector<StatusSample>& statuses(int seed) const;
  /// Status resent over Iridium at separation.
  std::optional<StatusSample> bridge_status(int seed) const;
  std::uint64_t beacons_heard() const;

  const std::vector<CanProbe>& can_probes() const;
  const std::vector<ActionLog>& actions() const;

  nlohmann::json summary() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string power_trace_csv(const std::vector<power::PowerBusState>& trace);

}  // namespace seedsim::mission
