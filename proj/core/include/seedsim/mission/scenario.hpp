#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/flight/sensors.hpp"
#include "seedsim/flight/trajectory.hpp"
#include "seedsim/geometry.hpp"
#include "seedsim/power/power_system.hpp"
#include "seedsim/transport/iridium.hpp"
#include "seedsim/transport/lora.hpp"
#include "seedsim/transport/uart.hpp"

namespace seedsim::mission {

/// Timed scenario action.  Kinds:
///   command {command, target}     ground dispatches a telecommand
///   rbc_cut_rxsm / rbc_restore_rxsm
///   rbc_power {on}
///   rbc_can_probe                 RBC transmits a telecommand on CAN (result recorded)
///   latch {seed, bat1, bat2}      COP drives DIS levels and clocks the flip-flops
///   sever                         umbilical separation at this time instead of apex
///   test_mode {seed, on}
struct ScriptAction {
  double at_s = 0.0;
  std::string kind;
  nlohmann::json args = nlohmann::json::object();
};

/// Periodic servo activity expanded into LoadProfile pulses.
struct ServoPattern {
  double start_s = 0.0;
  double end_s = 0.0;  // 0: until scenario end
  double period_s = 2.0;
  double duration_s = 0.3;
  double current_a = 1.2;
  bool descent_only = true;
};

struct Scenario {
  std::string name = "nominal";
  std::uint64_t seed = 1;
  double duration_s = 1500.0;
  double epoch_unix_s = 1677664800.0;  // 2023-03-01T10:00:00Z
  GeoPoint origin = kDefaultOrigin;

  flight::FlightProfile profile;
  flight::SensorParams sensors;
  power::PowerParams power;
  double baseline_w = 3.0;
  std::vector<ServoPattern> servo_patterns{ServoPattern{}};
  std::vector<power::ServoPulse> servo_pulses;

  transport::UartParams uart;
  double rxsm_bitrate = 38400.0;
  double can_bitrate = 500000.0;
  transport::IridiumParams iridium;
  transport::LoRaParams lora;
  bool iridium_enabled = true;
  double sbd_period_s = 10.0;
  bool lora_enabled = true;
  bool rxsm_connected = true;  // false: seeds run from batteries from t=0
  bool ejection = true;        // sever at apex

  double tick_hz = 250.0;
  double status_hz = 1.0;
  double summary_hz = 10.0;
  double power_status_hz = 50.0;
  double command_timeout_s = 10.0;
  std::string uplink_key_hex = "5eed5eed00112233445566778899aabb";

  Vec3 recovery_position{500.0, -300.0, 0.0};
  nlohmann::json topics;  // empty: default table
  std::vector<ScriptAction> script;

  /// Servo pulses from servo_pulses plus every pattern, clipped to the scenario.
  power::LoadProfile load_profile() const;
  void validate() const;

  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::filesystem::path& file);
};

nlohmann::json default_topic_table();

Scenario nominal_scenario();
Scenario prelaunch_radio_silence_scenario();
Scenario wind_tunnel_scenario(bool imbalanced = false);

double parse_iso8601(const std::string& text);

}  // namespace seedsim::mission
