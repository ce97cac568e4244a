#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "seedsim/geometry.hpp"

namespace seedsim::flight {

enum class MissionPhase : std::uint8_t {
  PreLaunch = 0,
  RadioSilence = 1,
  Ascent = 2,
  Ejection = 3,
  Descent = 4,
  Landed = 5,
};
const char* to_string(MissionPhase p);
std::optional<MissionPhase> phase_from_string(const char* name);

/// Launch-to-landing ordering; RadioSilence sits beside PreLaunch.
int phase_rank(MissionPhase p);
/// True for the allowed edges PreLaunch<->RadioSilence and forward steps of the sequence.
bool valid_transition(MissionPhase from, MissionPhase to);

enum class ProfileKind { Nominal, WindTunnel, Static };

struct FlatSpin {
  double start_s = 0.0;
  double duration_s = 20.0;
  double magnitude_g = 115.0;
  double rotor_rate_hz = 25.0;
};

struct SinkPoint {
  double altitude_m;
  double sink_mps;
};

struct FlightProfile {
  ProfileKind kind = ProfileKind::Nominal;
  double launch_time_s = 60.0;
  double burn_time_s = 26.0;
  double apogee_m = 80000.0;
  double ejection_duration_s = 1.0;
  std::vector<SinkPoint> sink_table{{0.0, 12.0},      {5000.0, 20.0},   {10000.0, 30.0}, {20000.0, 50.0},
                                    {40000.0, 150.0}, {60000.0, 500.0}, {80000.0, 1000.0}};
  Vec3 wind_mps{6.0, 3.0, 0.0};
  double drift_tau_s = 5.0;
  double rotor_rate_hz = 10.0;
  double rotor_tau_s = 1.5;
  std::vector<FlatSpin> flat_spins;

  // Wind tunnel: fixed position, constant airspeed, scripted rotor setpoints (time, Hz).
  double airspeed_mps = 15.0;
  double tunnel_altitude_m = 300.0;
  std::vector<std::pair<double, double>> rotor_setpoints;

  double sink_rate(double altitude_m) const;
  /// Net upward acceleration during the burn that places the apex at apogee_m.
  double burn_acceleration() const;
  double apex_time_s() const;
  double rotor_setpoint(double t_s) const;
  const FlatSpin* active_spin(double t_s) const;
};

FlightProfile nominal_profile();
FlightProfile wind_tunnel_profile(std::vector<std::pair<double, double>> setpoints = {{0.0, 8.0},
                                                                                     {30.0, 10.0},
                                                                                     {60.0, 12.0},
                                                                                     {90.0, 9.0}});

struct TrajectoryState {
  double time_s = 0.0;
  Vec3 position;
  Vec3 velocity;
  Vec3 body_accel_g{0.0, 0.0, 1.0};  // specific force in body axes
  double rotor_rate_hz = 0.0;
  double rotor_phase_rad = 0.0;
  double airspeed_mps = 0.0;
  MissionPhase phase = MissionPhase::PreLaunch;
};

TrajectoryState initial_state(const FlightProfile& profile);

/// Advances by dt (seconds, > 0).  Landed is absorbing.
TrajectoryState propagate(const TrajectoryState& state, double dt, const FlightProfile& profile);

/// Adds a flat-spin window; PhaseError unless t0 falls inside the profile's descent.
FlightProfile inject_flat_spin(FlightProfile profile, double t0, double duration_s = 20.0, double magnitude_g = 115.0);

/// Descent window [start, landing) found by propagating at coarse resolution.
std::pair<double, double> descent_window(const FlightProfile& profile);

}  // namespace seedsim::flight
