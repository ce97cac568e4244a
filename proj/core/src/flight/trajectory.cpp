#include "seedsim/flight/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "seedsim/error.hpp"

namespace seedsim::flight {

namespace {
constexpr double kG = 9.80665;
constexpr double kMaxSubstep = 0.01;
}  // namespace

const char* to_string(MissionPhase p) {
  switch (p) {
    case MissionPhase::PreLaunch: return "PreLaunch";
    case MissionPhase::RadioSilence: return "RadioSilence";
    case MissionPhase::Ascent: return "Ascent";
    case MissionPhase::Ejection: return "Ejection";
    case MissionPhase::Descent: return "Descent";
    case MissionPhase::Landed: return "Landed";
  }
  return "?";
}

std::optional<MissionPhase> phase_from_string(const char* name) {
  for (int i = 0; i <= 5; ++i) {
    const auto p = static_cast<MissionPhase>(i);
    if (std::strcmp(name, to_string(p)) == 0) return p;
  }
  return std::nullopt;
}

int phase_rank(MissionPhase p) {
  switch (p) {
    case MissionPhase::PreLaunch:
    case MissionPhase::RadioSilence: return 0;
    case MissionPhase::Ascent: return 1;
    case MissionPhase::Ejection: return 2;
    case MissionPhase::Descent: return 3;
    case MissionPhase::Landed: return 4;
  }
  return 0;
}

bool valid_transition(MissionPhase from, MissionPhase to) {
  if (from == to) return true;
  if (from == MissionPhase::PreLaunch && to == MissionPhase::RadioSilence) return true;
  if (from == MissionPhase::RadioSilence) return to == MissionPhase::PreLaunch;
  return phase_rank(to) == phase_rank(from) + 1;
}

double FlightProfile::sink_rate(double altitude_m) const {
  if (sink_table.empty()) throw Error(Errc::ScenarioError, "empty sink table");
  if (altitude_m <= sink_table.front().altitude_m) return sink_table.front().sink_mps;
  for (std::size_t i = 1; i < sink_table.size(); ++i) {
    const auto& a = sink_table[i - 1];
    const auto& b = sink_table[i];
    if (altitude_m <= b.altitude_m) {
      return a.sink_mps + (b.sink_mps - a.sink_mps) * (altitude_m - a.altitude_m) / (b.altitude_m - a.altitude_m);
    }
  }
  return sink_table.back().sink_mps;
}

double FlightProfile::burn_acceleration() const {
  // apex = a T^2 / 2 + (a T)^2 / (2 g)
  const double t2 = burn_time_s * burn_time_s;
  const double qa = t2 / (2.0 * kG), qb = t2 / 2.0, qc = -apogee_m;
  return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
}

double FlightProfile::apex_time_s() const {
  const double a = burn_acceleration();
  return launch_time_s + burn_time_s + a * burn_time_s / kG;
}

double FlightProfile::rotor_setpoint(double t_s) const {
  double sp = rotor_setpoints.empty() ? rotor_rate_hz : rotor_setpoints.front().second;
  for (const auto& [t, hz] : rotor_setpoints) {
    if (t_s >= t) sp = hz;
  }
  return sp;
}

const FlatSpin* FlightProfile::active_spin(double t_s) const {
  for (const auto& s : flat_spins) {
    if (s.magnitude_g > 0.0 && t_s >= s.start_s && t_s < s.start_s + s.duration_s) return &s;
  }
  return nullptr;
}

FlightProfile nominal_profile() { return FlightProfile{}; }

FlightProfile wind_tunnel_profile(std::vector<std::pair<double, double>> setpoints) {
  FlightProfile p;
  p.kind = ProfileKind::WindTunnel;
  p.rotor_setpoints = std::move(setpoints);
  p.wind_mps = {};
  return p;
}

TrajectoryState initial_state(const FlightProfile& profile) {
  TrajectoryState s;
  if (profile.kind == ProfileKind::WindTunnel) {
    s.position = {0.0, 0.0, profile.tunnel_altitude_m};
    s.phase = MissionPhase::Descent;
    s.airspeed_mps = profile.airspeed_mps;
    s.rotor_rate_hz = profile.rotor_setpoint(0.0);
  }
  return s;
}

namespace {

void advance_rotor(TrajectoryState& s, double target_hz, double tau, double dt) {
  const double k = tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0;
  const double before = s.rotor_rate_hz;
  s.rotor_rate_hz += (target_hz - s.rotor_rate_hz) * k;
  s.rotor_phase_rad += std::numbers::pi * (before + s.rotor_rate_hz) * dt;
  s.rotor_phase_rad = std::fmod(s.rotor_phase_rad, 2.0 * std::numbers::pi);
}

void ascent_kinematics(TrajectoryState& s, const FlightProfile& p, double t) {
  const double a = p.burn_acceleration();
  const double tb = p.burn_time_s;
  double tl = t - p.launch_time_s;
  if (tl <= tb) {
    s.position = {0.0, 0.0, 0.5 * a * tl * tl};
    s.velocity = {0.0, 0.0, a * tl};
    s.body_accel_g = {0.0, 0.0, (a + kG) / kG};
  } else {
    const double vb = a * tb, hb = 0.5 * a * tb * tb;
    const double tc = tl - tb;
    s.position = {0.0, 0.0, hb + vb * tc - 0.5 * kG * tc * tc};
    s.velocity = {0.0, 0.0, vb - kG * tc};
    s.body_accel_g = {};
  }
}

void descent_substep(TrajectoryState& s, const FlightProfile& p, double dt) {
  const double sink = p.sink_rate(s.position.z);
  const double vz = s.velocity.z;
  // Quadratic drag scaled so the equilibrium speed equals the tabulated sink rate.
  const double drag = vz < 0.0 ? kG * (vz / sink) * (vz / sink) : 0.0;
  const double az = -kG + drag;
  s.velocity.z += az * dt;
  const double kh = p.drift_tau_s > 0.0 ? 1.0 - std::exp(-dt / p.drift_tau_s) : 1.0;
  s.velocity.x += (p.wind_mps.x - s.velocity.x) * kh;
  s.velocity.y += (p.wind_mps.y - s.velocity.y) * kh;
  s.position += s.velocity * dt;
  s.body_accel_g = {0.0, 0.0, (az + kG) / kG};
  s.airspeed_mps = std::abs(s.velocity.z);
  if (const FlatSpin* spin = p.active_spin(s.time_s + dt)) {
    advance_rotor(s, spin->rotor_rate_hz, p.rotor_tau_s, dt);
    s.body_accel_g.x = spin->magnitude_g;
  } else {
    advance_rotor(s, p.rotor_rate_hz, p.rotor_tau_s, dt);
  }
  if (s.position.z <= 0.0) {
    s.position.z = 0.0;
    s.velocity = {};
    s.body_accel_g = {0.0, 0.0, 1.0};
    s.airspeed_mps = 0.0;
    s.phase = MissionPhase::Landed;
  }
}

TrajectoryState step_once(TrajectoryState s, double dt, const FlightProfile& p) {
  const double t1 = s.time_s + dt;
  switch (s.phase) {
    case MissionPhase::Landed:
      break;
    case MissionPhase::PreLaunch:
    case MissionPhase::RadioSilence:
      if (p.kind == ProfileKind::Nominal && t1 >= p.launch_time_s && s.phase == MissionPhase::PreLaunch) {
        s.phase = MissionPhase::Ascent;
        ascent_kinematics(s, p, t1);
      }
      break;
    case MissionPhase::Ascent: {
      const double apex = p.apex_time_s();
      if (t1 >= apex) {
        ascent_kinematics(s, p, apex);
        s.velocity = {};
        s.body_accel_g = {};
        s.phase = MissionPhase::Ejection;
      } else {
        ascent_kinematics(s, p, t1);
      }
      break;
    }
    case MissionPhase::Ejection:
      s.velocity.z -= kG * dt;
      s.position += s.velocity * dt;
      s.body_accel_g = {};
      if (t1 >= p.apex_time_s() + p.ejection_duration_s) s.phase = MissionPhase::Descent;
      break;
    case MissionPhase::Descent:
      if (p.kind == ProfileKind::WindTunnel) {
        s.airspeed_mps = p.airspeed_mps;
        s.body_accel_g = {0.0, 0.0, 1.0};
        const FlatSpin* spin = p.active_spin(t1);
        advance_rotor(s, spin ? spin->rotor_rate_hz : p.rotor_setpoint(t1), p.rotor_tau_s, dt);
        if (spin) s.body_accel_g.x = spin->magnitude_g;
      } else {
        descent_substep(s, p, dt);
      }
      break;
  }
  s.time_s = t1;
  return s;
}

}  // namespace

TrajectoryState propagate(const TrajectoryState& state, double dt, const FlightProfile& profile) {
  if (!(dt > 0.0)) throw Error(Errc::ScenarioError, "propagate needs dt > 0");
  if (state.phase == MissionPhase::Landed) return state;
  TrajectoryState s = state;
  const int n = std::max(1, static_cast<int>(std::ceil(dt / kMaxSubstep - 1e-9)));
  const double h = dt / n;
  for (int i = 0; i < n; ++i) s = step_once(s, h, profile);
  s.time_s = state.time_s + dt;
  return s;
}

std::pair<double, double> descent_window(const FlightProfile& profile) {
  if (profile.kind == ProfileKind::WindTunnel) return {0.0, std::numeric_limits<double>::infinity()};
  if (profile.kind == ProfileKind::Static) return {0.0, 0.0};
  const double start = profile.apex_time_s() + profile.ejection_duration_s;
  FlightProfile bare = profile;
  bare.flat_spins.clear();
  TrajectoryState s = initial_state(bare);
  while (s.phase != MissionPhase::Landed && s.time_s < 1e5) s = propagate(s, 1.0, bare);
  return {start, s.time_s};
}

FlightProfile inject_flat_spin(FlightProfile profile, double t0, double duration_s, double magnitude_g) {
  const auto [start, end] = descent_window(profile);
  if (t0 < start || t0 >= end) throw Error(Errc::PhaseError, "flat spin must start during descent");
  if (duration_s < 0.0 || magnitude_g < 0.0) throw Error(Errc::ScenarioError, "negative flat spin parameters");
  FlatSpin spin;
  spin.start_s = t0;
  spin.duration_s = duration_s;
  spin.magnitude_g = magnitude_g;
  profile.flat_spins.push_back(spin);
  return profile;
}

}  // namespace seedsim::flight
