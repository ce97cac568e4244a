#include "seedsim/mission/scenario.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::mission {

using nlohmann::json;

double parse_iso8601(const std::string& text) {
  std::tm tm{};
  double frac = 0.0;
  int sec = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &sec) != 6) {
    throw Error(Errc::ScenarioError, fmt::format("bad timestamp '{}'", text));
  }
  const auto dot = text.find('.');
  if (dot != std::string::npos) frac = std::stod("0" + text.substr(dot, text.find_first_not_of("0123456789", dot + 1) - dot));
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  tm.tm_sec = sec;
  return double(timegm(&tm)) + frac;
}

json default_topic_table() {
  return json::parse(R"([
    {"id": 10, "name": "seed_status",    "size": 24, "links": ["can"],            "message": "seed_status"},
    {"id": 20, "name": "sensor_summary", "size": 40, "links": ["uart1", "uart2"], "message": "sensor_summary"},
    {"id": 21, "name": "power_status",   "size": 16, "links": ["uart1", "uart2"], "message": "power_status"},
    {"id": 30, "name": "telecommand",    "size": 8,  "links": ["can"],            "message": "telecommand"},
    {"id": 31, "name": "cop_command",    "size": 3,  "links": ["uart1", "uart2"], "message": "cop_command"},
    {"id": 32, "name": "command_ack",    "size": 5,  "links": ["uart1", "uart2"], "message": "command_ack"},
    {"id": 33, "name": "seed_ack",       "size": 5,  "links": ["can"],            "message": "command_ack"}
  ])");
}

power::LoadProfile Scenario::load_profile() const {
  power::LoadProfile lp;
  lp.baseline_w = baseline_w;
  lp.servo_pulses = servo_pulses;
  std::pair<double, double> descent{0.0, duration_s};
  bool have_descent = false;
  for (const auto& pat : servo_patterns) {
    double start = pat.start_s;
    double end = pat.end_s > 0.0 ? std::min(pat.end_s, duration_s) : duration_s;
    if (pat.descent_only && profile.kind == flight::ProfileKind::Nominal) {
      if (!have_descent) {
        descent = flight::descent_window(profile);
        have_descent = true;
      }
      start = std::max(start, descent.first);
      end = std::min(end, descent.second);
    }
    if (pat.period_s <= 0.0) throw Error(Errc::ScenarioError, "servo pattern period must be positive");
    for (double t = start; t + pat.duration_s <= end; t += pat.period_s) {
      lp.servo_pulses.push_back({t, pat.duration_s, pat.current_a});
    }
  }
  lp.validate();
  return lp;
}

void Scenario::validate() const {
  if (duration_s <= 0.0) throw Error(Errc::ScenarioError, "duration must be positive");
  if (tick_hz <= 0.0 || std::abs(1e6 / tick_hz - std::round(1e6 / tick_hz)) > 1e-9) {
    throw Error(Errc::ScenarioError, "tick rate must divide one second into whole microseconds");
  }
  for (double r : {status_hz, summary_hz, power_status_hz}) {
    if (r <= 0.0 || r > tick_hz || std::abs(tick_hz / r - std::round(tick_hz / r)) > 1e-9) {
      throw Error(Errc::ScenarioError, fmt::format("rate {} Hz must divide the {} Hz tick", r, tick_hz));
    }
  }
  if (sbd_period_s <= 0.0) throw Error(Errc::ScenarioError, "sbd period must be positive");
  for (const auto& a : script) {
    static const char* kKinds[] = {"command", "rbc_cut_rxsm", "rbc_restore_rxsm", "rbc_power", "rbc_can_probe",
                                   "latch",   "sever",        "test_mode"};
    if (std::find(std::begin(kKinds), std::end(kKinds), a.kind) == std::end(kKinds)) {
      throw Error(Errc::ScenarioError, fmt::format("unknown script action '{}'", a.kind));
    }
    if (a.at_s < 0.0) throw Error(Errc::ScenarioError, "script actions need at >= 0");
  }
  load_profile();
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Vec3 read_vec(const json& j) {
  Vec3 v;
  if (j.size() >= 2) {
    v.x = j.at(0).get<double>();
    v.y = j.at(1).get<double>();
  }
  if (j.size() >= 3) v.z = j.at(2).get<double>();
  return v;
}

void read_battery(const json& j, power::BatteryParams& b, double& soc) {
  read(j, "internal_resistance_ohm", b.internal_resistance_ohm);
  read(j, "capacity_ah", b.capacity_ah);
  read(j, "cells_series", b.cells_series);
  read(j, "soc", soc);
}

void read_profile(const json& j, flight::FlightProfile& p) {
  if (j.contains("kind")) {
    const auto k = j.at("kind").get<std::string>();
    if (k == "nominal") {
      p.kind = flight::ProfileKind::Nominal;
    } else if (k == "wind_tunnel") {
      p = flight::wind_tunnel_profile();
    } else if (k == "static") {
      p.kind = flight::ProfileKind::Static;
    } else {
      throw Error(Errc::ScenarioError, fmt::format("unknown profile kind '{}'", k));
    }
  }
  read(j, "launch_time_s", p.launch_time_s);
  read(j, "burn_time_s", p.burn_time_s);
  read(j, "apogee_m", p.apogee_m);
  read(j, "ejection_duration_s", p.ejection_duration_s);
  read(j, "drift_tau_s", p.drift_tau_s);
  read(j, "rotor_rate_hz", p.rotor_rate_hz);
  read(j, "rotor_tau_s", p.rotor_tau_s);
  read(j, "airspeed_mps", p.airspeed_mps);
  read(j, "tunnel_altitude_m", p.tunnel_altitude_m);
  if (j.contains("wind_mps")) p.wind_mps = read_vec(j.at("wind_mps"));
  if (j.contains("sink_table")) {
    p.sink_table.clear();
    for (const auto& e : j.at("sink_table")) p.sink_table.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  }
  if (j.contains("rotor_setpoints")) {
    p.rotor_setpoints.clear();
    for (const auto& e : j.at("rotor_setpoints")) p.rotor_setpoints.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  }
  if (j.contains("flat_spins")) {
    for (const auto& e : j.at("flat_spins")) {
      const double t0 = e.at("start_s").get<double>();
      p = flight::inject_flat_spin(p, t0, e.value("duration_s", 20.0), e.value("magnitude_g", 115.0));
      p.flat_spins.back().rotor_rate_hz = e.value("rotor_rate_hz", p.flat_spins.back().rotor_rate_hz);
    }
  }
}

void read_sensors(const json& j, flight::SensorParams& s) {
  read(j, "noise", s.noise);
  read(j, "gps_ceiling_m", s.gps_ceiling_m);
  read(j, "gps_max_rotor_hz", s.gps_max_rotor_hz);
  read(j, "gps_noise_m", s.gps_noise_m);
  read(j, "accel_precise_range_g", s.accel_precise_range_g);
  read(j, "baro_wide_accuracy_mbar", s.baro_wide_accuracy_mbar);
  read(j, "tachometer_noise_hz", s.tachometer_noise_hz);
  if (j.contains("harmonics")) {
    const auto& h = j.at("harmonics");
    if (h.size() != 3) throw Error(Errc::ScenarioError, "harmonics needs three entries");
    for (std::size_t i = 0; i < 3; ++i) {
      s.harmonics[i].order = h[i].value("order", s.harmonics[i].order);
      s.harmonics[i].accel_g = h[i].value("accel_g", s.harmonics[i].accel_g);
      s.harmonics[i].gyro_dps = h[i].value("gyro_dps", s.harmonics[i].gyro_dps);
    }
  }
}

}  // namespace

Scenario Scenario::from_json(const json& j) {
  Scenario s;
  try {
    read(j, "name", s.name);
    read(j, "seed", s.seed);
    read(j, "duration_s", s.duration_s);
    if (j.contains("epoch")) s.epoch_unix_s = parse_iso8601(j.at("epoch").get<std::string>());
    if (j.contains("origin")) {
      const auto& o = j.at("origin");
      s.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.size() > 2 ? o.at(2).get<double>() : 0.0};
    }
    if (j.contains("profile")) read_profile(j.at("profile"), s.profile);
    if (j.contains("sensors")) read_sensors(j.at("sensors"), s.sensors);
    if (j.contains("power")) {
      const auto& p = j.at("power");
      if (p.contains("battery1")) read_battery(p.at("battery1"), s.power.battery1, s.power.soc1);
      if (p.contains("battery2")) read_battery(p.at("battery2"), s.power.battery2, s.power.soc2);
      read(p, "hysteresis_v", s.power.hysteresis_v);
      read(p, "min_input_v", s.power.min_input_v);
      read(p, "rxsm_harness_ohm", s.power.rxsm_harness_ohm);
      read(p, "rxsm_voltage", s.power.rxsm_voltage);
      read(p, "r_ds_on_ohm", s.power.diode.r_ds_on_ohm);
      read(p, "baseline_w", s.baseline_w);
      if (p.contains("servo_patterns")) {
        s.servo_patterns.clear();
        for (const auto& e : p.at("servo_patterns")) {
          ServoPattern sp;
          read(e, "start_s", sp.start_s);
          read(e, "end_s", sp.end_s);
          read(e, "period_s", sp.period_s);
          read(e, "duration_s", sp.duration_s);
          read(e, "current_a", sp.current_a);
          read(e, "descent_only", sp.descent_only);
          s.servo_patterns.push_back(sp);
        }
      }
      if (p.contains("servo_pulses")) {
        for (const auto& e : p.at("servo_pulses")) {
          s.servo_pulses.push_back({e.at("start_s").get<double>(), e.at("duration_s").get<double>(),
                                    e.at("current_a").get<double>()});
        }
      }
    }
    if (j.contains("links")) {
      const auto& l = j.at("links");
      read(l, "uart_bitrate", s.uart.bitrate);
      read(l, "uart_byte_error_rate", s.uart.byte_error_rate);
      read(l, "rxsm_bitrate", s.rxsm_bitrate);
      read(l, "can_bitrate", s.can_bitrate);
      if (l.contains("iridium")) {
        const auto& i = l.at("iridium");
        read(i, "per_message_loss", s.iridium.per_message_loss);
        read(i, "latency_min_s", s.iridium.latency_min_s);
        read(i, "latency_max_s", s.iridium.latency_max_s);
        read(i, "enabled", s.iridium_enabled);
        read(i, "period_s", s.sbd_period_s);
      }
      if (l.contains("lora")) {
        const auto& r = l.at("lora");
        read(r, "tx_power_dbm", s.lora.tx_power_dbm);
        read(r, "path_loss_exponent", s.lora.path_loss_exponent);
        read(r, "reference_loss_db", s.lora.reference_loss_db);
        read(r, "noise_sigma_db", s.lora.noise_sigma_db);
        read(r, "sensitivity_dbm", s.lora.sensitivity_dbm);
        read(r, "beacon_interval_s", s.lora.beacon_interval_s);
        read(r, "enabled", s.lora_enabled);
      }
    }
    read(j, "rxsm_connected", s.rxsm_connected);
    read(j, "ejection", s.ejection);
    read(j, "tick_hz", s.tick_hz);
    read(j, "command_timeout_s", s.command_timeout_s);
    read(j, "uplink_key_hex", s.uplink_key_hex);
    if (j.contains("recovery_position")) s.recovery_position = read_vec(j.at("recovery_position"));
    if (j.contains("topics")) s.topics = j.at("topics");
    if (j.contains("script")) {
      for (const auto& e : j.at("script")) {
        ScriptAction a;
        a.at_s = e.at("at").get<double>();
        a.kind = e.at("action").get<std::string>();
        a.args = e;
        s.script.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ScenarioError, fmt::format("scenario JSON: {}", e.what()));
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::ScenarioError, fmt::format("cannot open scenario {}", file.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ScenarioError, fmt::format("{}: {}", file.string(), e.what()));
  }
  return from_json(j);
}

Scenario nominal_scenario() {
  Scenario s;
  s.power.battery2.internal_resistance_ohm = 0.092;
  s.script.push_back({20.0, "command", {{"command", "ping"}, {"target", "broadcast"}}});
  s.script.push_back({400.0, "rbc_can_probe", json::object()});
  s.script.push_back({410.0, "command", {{"command", "ping"}, {"target", "broadcast"}}});
  s.validate();
  return s;
}

Scenario prelaunch_radio_silence_scenario() {
  Scenario s;
  s.name = "prelaunch_radio_silence";
  s.duration_s = 30.0;
  s.profile.launch_time_s = 1e6;
  s.iridium_enabled = false;
  s.lora_enabled = false;
  s.servo_patterns.clear();
  s.script = {
      {2.0, "command", {{"command", "ping"}, {"target", "broadcast"}}},
      {5.0, "command", {{"command", "request-radio-silence"}, {"target", "broadcast"}}},
      {8.0, "rbc_cut_rxsm", json::object()},
      {10.0, "rbc_power", {{"on", false}}},
      {15.0, "rbc_power", {{"on", true}}},
      {22.0, "command", {{"command", "ping"}, {"target", "broadcast"}}},
  };
  s.validate();
  return s;
}

Scenario wind_tunnel_scenario(bool imbalanced) {
  Scenario s;
  s.name = imbalanced ? "wind_tunnel_imbalanced" : "wind_tunnel";
  s.duration_s = 120.0;
  s.profile = flight::wind_tunnel_profile();
  s.rxsm_connected = false;
  s.ejection = false;
  s.iridium_enabled = false;
  s.lora_enabled = false;
  s.power.battery2.internal_resistance_ohm = imbalanced ? 0.27 : 0.092;
  s.servo_patterns = {ServoPattern{1.0, 0.0, 2.0, 0.3, 1.2, false}};
  s.validate();
  return s;
}

}  // namespace seedsim::mission
