#include "seedsim/power/power_system.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::power {

const char* to_string(Source s) {
  switch (s) {
    case Source::Bat1: return "bat1";
    case Source::Bat2: return "bat2";
    case Source::Rxsm: return "rxsm";
  }
  return "?";
}

std::string SourceSet::str() const {
  if (empty()) return "none";
  std::string out;
  for (Source s : {Source::Bat1, Source::Bat2, Source::Rxsm}) {
    if (!has(s)) continue;
    if (!out.empty()) out += '+';
    out += to_string(s);
  }
  return out;
}

double diode_loss(DiodeMode mode, double i_load, const DiodeParams& params) {
  if (i_load < 0.0) throw Error(Errc::ScenarioError, "diode_loss: negative load current");
  switch (mode) {
    case DiodeMode::Schottky: return params.schottky_drop_v * i_load;
    case DiodeMode::IdealMosfet: return 2.0 * i_load * i_load * params.r_ds_on_ohm;
  }
  return 0.0;
}

void DisableLatch::set_ff_clk(bool level) {
  if (level && !clk_) {
    q1_ = d1_;
    q2_ = d2_;
  }
  clk_ = level;
}

void DisableLatch::pulse_clock() {
  set_ff_clk(false);
  set_ff_clk(true);
  set_ff_clk(false);
}

SourceSet select_sources(double v1, double v2, double vr, const DisableLatch& latches, double hysteresis,
                         double min_input) {
  if (v1 < 0.0 || v2 < 0.0 || vr < 0.0) throw Error(Errc::ScenarioError, "select_sources: negative voltage");
  const std::array<double, 3> v{v1, v2, vr};
  const std::array<bool, 3> allowed{!latches.q1(), !latches.q2(), true};
  double vmax = -1.0;
  for (int k = 0; k < 3; ++k) {
    if (allowed[k] && v[k] >= min_input) vmax = std::max(vmax, v[k]);
  }
  if (vmax < 0.0) throw Error(Errc::NoSource, "no enabled input at or above minimum voltage");
  SourceSet out;
  for (int k = 0; k < 3; ++k) {
    if (allowed[k] && v[k] >= min_input && v[k] >= vmax - hysteresis) out.insert(static_cast<Source>(k));
  }
  return out;
}

void LoadProfile::validate() const {
  if (baseline_w < 0.0) throw Error(Errc::ScenarioError, "load baseline must be non-negative");
  for (const auto& p : servo_pulses) {
    if (p.start_s < 0.0 || p.duration_s < 0.0 || p.current_a < 0.0) {
      throw Error(Errc::ScenarioError, "servo pulse fields must be non-negative");
    }
  }
}

double LoadProfile::servo_current(double t_s) const {
  double i = 0.0;
  for (const auto& p : servo_pulses) {
    if (t_s >= p.start_s && t_s < p.start_s + p.duration_s) i += p.current_a;
  }
  return i;
}

bool LoadProfile::in_pulse(double t_s) const {
  return std::any_of(servo_pulses.begin(), servo_pulses.end(),
                     [&](const ServoPulse& p) { return t_s >= p.start_s && t_s < p.start_s + p.duration_s; });
}

double PowerBusState::current(Source s) const {
  switch (s) {
    case Source::Bat1: return i_bat1;
    case Source::Bat2: return i_bat2;
    case Source::Rxsm: return i_rxsm;
  }
  return 0.0;
}

double PowerBusState::source_voltage(Source s) const {
  switch (s) {
    case Source::Bat1: return v_bat1;
    case Source::Bat2: return v_bat2;
    case Source::Rxsm: return v_rxsm;
  }
  return 0.0;
}

BusSolution solve_bus(const std::array<double, 3>& emf, const std::array<double, 3>& resistance, SourceSet candidates,
                      LoadDemand load, double min_bus_v) {
  BusSolution sol;
  SourceSet set = candidates;
  while (!set.empty()) {
    double g = 0.0, s = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (!set.has(static_cast<Source>(k))) continue;
      g += 1.0 / resistance[k];
      s += emf[k] / resistance[k];
    }
    // G V^2 - (S - I) V + P = 0, upper root is the stable operating point.
    const double b = s - load.current_a;
    const double disc = b * b - 4.0 * g * load.power_w;
    if (b <= 0.0 || disc < 0.0) return sol;  // collapse: sources cannot carry this load
    const double v = (b + std::sqrt(disc)) / (2.0 * g);

    bool reverse = false;
    std::array<double, 3> i{};
    for (int k = 0; k < 3; ++k) {
      if (!set.has(static_cast<Source>(k))) continue;
      i[k] = (emf[k] - v) / resistance[k];
      if (i[k] < 0.0) reverse = true;
    }
    if (reverse && set.size() > 1) {
      // Blocked; remove the lowest-emf reverse-biased source and resolve.
      int worst = -1;
      for (int k = 0; k < 3; ++k) {
        if (set.has(static_cast<Source>(k)) && i[k] < 0.0 && (worst < 0 || emf[k] < emf[worst])) worst = k;
      }
      set.erase(static_cast<Source>(worst));
      continue;
    }
    for (double& x : i) x = std::max(x, 0.0);
    if (v < min_bus_v) return sol;
    sol.powered = true;
    sol.bus_voltage = v;
    sol.currents = i;
    sol.conducting = set;
    return sol;
  }
  return sol;
}

PowerSystem::PowerSystem(PowerParams params)
    : params_(params),
      bat1_(params.battery1, params.soc1),
      bat2_(params.battery2, params.soc2),
      v_rxsm_(params.rxsm_voltage) {
  if (params_.hysteresis_v < 0.0 || params_.rxsm_harness_ohm < 0.0 || params_.diode.r_ds_on_ohm < 0.0) {
    throw Error(Errc::ScenarioError, "invalid power parameters");
  }
}

BatteryString& PowerSystem::battery(Source s) {
  if (s == Source::Rxsm) throw Error(Errc::ScenarioError, "rxsm is not a battery");
  return s == Source::Bat1 ? bat1_ : bat2_;
}

const BatteryString& PowerSystem::battery(Source s) const {
  if (s == Source::Rxsm) throw Error(Errc::ScenarioError, "rxsm is not a battery");
  return s == Source::Bat1 ? bat1_ : bat2_;
}

double PowerSystem::path_resistance(Source s) const {
  const double fets = 2.0 * params_.diode.r_ds_on_ohm;
  switch (s) {
    case Source::Bat1: return bat1_.params().internal_resistance_ohm + fets;
    case Source::Bat2: return bat2_.params().internal_resistance_ohm + fets;
    case Source::Rxsm: return params_.rxsm_harness_ohm + fets;
  }
  return fets;
}

SourceSet PowerSystem::enabled() const {
  SourceSet s{Source::Rxsm};
  if (!latch_.q1()) s.insert(Source::Bat1);
  if (!latch_.q2()) s.insert(Source::Bat2);
  return s;
}

PowerBusState PowerSystem::evaluate(LoadDemand load, double t_s) const {
  PowerBusState st;
  st.time_s = t_s;
  st.v_bat1 = bat1_.open_circuit_voltage();
  st.v_bat2 = bat2_.open_circuit_voltage();
  st.v_rxsm = v_rxsm_;
  st.latch1 = latch_.q1();
  st.latch2 = latch_.q2();
  st.enabled = enabled();

  SourceSet candidates;
  try {
    candidates = select_sources(st.v_bat1, st.v_bat2, st.v_rxsm, latch_, params_.hysteresis_v, params_.min_input_v);
  } catch (const Error& e) {
    if (e.code() != Errc::NoSource) throw;
    return st;
  }
  const std::array<double, 3> emf{st.v_bat1, st.v_bat2, st.v_rxsm};
  const std::array<double, 3> r{path_resistance(Source::Bat1), path_resistance(Source::Bat2),
                                path_resistance(Source::Rxsm)};
  const BusSolution sol = solve_bus(emf, r, candidates, load, params_.min_input_v);
  if (!sol.powered) return st;

  st.powered = true;
  st.conducting = sol.conducting;
  st.bus_voltage = sol.bus_voltage;
  st.i_bat1 = sol.currents[0];
  st.i_bat2 = sol.currents[1];
  st.i_rxsm = sol.currents[2];
  st.load_w = load.power_w + load.current_a * sol.bus_voltage;
  for (int k = 0; k < 3; ++k) st.dissipation_w += sol.currents[k] * sol.currents[k] * r[k];
  return st;
}

PowerBusState PowerSystem::step(LoadDemand load, double t_s, double dt_s) {
  PowerBusState st = evaluate(load, t_s);
  st.warnings |= bat1_.step(st.i_bat1, dt_s);
  st.warnings |= bat2_.step(st.i_bat2, dt_s);
  last_ = st;
  return st;
}

std::string power_csv_header() {
  return "time_s,v_bus,v_bat1,i_bat1,v_bat2,i_bat2,v_rxsm,i_rxsm,conducting,latch1,latch2,powered";
}

std::string power_csv_row(const PowerBusState& s) {
  return fmt::format("{:.6f},{:.4f},{:.4f},{:.5f},{:.4f},{:.5f},{:.4f},{:.5f},{},{},{},{}", s.time_s, s.bus_voltage,
                     s.v_bat1, s.i_bat1, s.v_bat2, s.i_bat2, s.v_rxsm, s.i_rxsm, s.conducting.str(), int(s.latch1),
                     int(s.latch2), int(s.powered));
}

}  // namespace seedsim::power
