#pragma once

#include <array>
#include <optional>

#include "seedsim/flight/trajectory.hpp"
#include "seedsim/geometry.hpp"
#include "seedsim/kernel/rng.hpp"

namespace seedsim::flight {

struct Harmonic {
  int order;
  double accel_g;
  double gyro_dps;
};

struct SensorParams {
  double accel_precise_range_g = 16.0;
  double accel_precise_noise_g = 0.004;
  double accel_highload_range_g = 400.0;
  double accel_highload_noise_g = 0.15;
  double gyro_range_dps = 2000.0;
  double gyro_noise_dps = 0.05;
  double baro_precise_min_mbar = 10.0;
  double baro_precise_max_mbar = 1200.0;
  double baro_precise_noise_mbar = 0.8;
  double baro_precise_accuracy_mbar = 2.5;
  double baro_wide_max_mbar = 1200.0;
  double baro_wide_noise_mbar = 3.0;
  double baro_wide_accuracy_mbar = 10.0;
  double gps_rate_hz = 20.0;
  double gps_ceiling_m = 50000.0;
  double gps_max_rotor_hz = 20.0;
  double gps_noise_m = 2.5;
  double tachometer_noise_hz = 0.002;
  // Rotor-synchronous vibration seen by the accelerometers (z) and gyro (z).
  std::array<Harmonic, 3> harmonics{{{1, 0.2, 2.0}, {2, 0.35, 3.5}, {4, 0.8, 8.0}}};
  bool noise = true;
};

struct GpsFix {
  bool valid = false;
  GeoPoint position;
  double vz_mps = 0.0;
};

struct SensorSample {
  double time_s = 0.0;
  Vec3 accel_precise;
  Vec3 accel_highload;
  bool accel_precise_saturated = false;
  bool accel_highload_saturated = false;
  Vec3 gyro_dps;
  std::optional<double> baro_precise_mbar;  // nullopt: out of range
  double baro_wide_mbar = 0.0;
  GpsFix gps;
  double tachometer_hz = 0.0;
};

/// Stateless sampling: every call produces a fresh GPS solution.
SensorSample sample_sensors(const TrajectoryState& state, kernel::RngStream& rng, const SensorParams& params = {},
                            const GeoPoint& origin = kDefaultOrigin);

double saturate(double value, double range);

/// Per-seed sensor suite; holds the last GPS fix between 20 Hz epochs.
class SensorSuite {
 public:
  SensorSuite(kernel::RngStream rng, SensorParams params = {}, GeoPoint origin = kDefaultOrigin);

  SensorSample sample(const TrajectoryState& state);
  const SensorParams& params() const { return params_; }

 private:
  kernel::RngStream rng_;
  SensorParams params_;
  GeoPoint origin_;
  long long last_gps_epoch_ = -1;
  GpsFix last_fix_;
};

}  // namespace seedsim::flight
