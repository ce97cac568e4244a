#include "seedsim/flight/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "seedsim/flight/atmosphere.hpp"

namespace seedsim::flight {

namespace {

double noise(kernel::RngStream& rng, const SensorParams& p, double sigma) {
  return p.noise && sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0;
}

GpsFix gps_solution(const TrajectoryState& s, kernel::RngStream& rng, const SensorParams& p, const GeoPoint& origin) {
  GpsFix fix;
  const double nx = noise(rng, p, p.gps_noise_m);
  const double ny = noise(rng, p, p.gps_noise_m);
  const double nz = noise(rng, p, 1.5 * p.gps_noise_m);
  if (s.position.z > p.gps_ceiling_m || s.rotor_rate_hz > p.gps_max_rotor_hz) return fix;
  fix.valid = true;
  fix.position = to_geodetic(origin, s.position + Vec3{nx, ny, nz});
  fix.vz_mps = s.velocity.z;
  return fix;
}

}  // namespace

double saturate(double value, double range) { return std::clamp(value, -range, range); }

SensorSample sample_sensors(const TrajectoryState& s, kernel::RngStream& rng, const SensorParams& p,
                            const GeoPoint& origin) {
  SensorSample out;
  out.time_s = s.time_s;

  double vib_a = 0.0, vib_g = 0.0;
  if (s.rotor_rate_hz > 0.0) {
    for (const auto& h : p.harmonics) {
      const double ph = h.order * s.rotor_phase_rad;
      vib_a += h.accel_g * std::sin(ph);
      vib_g += h.gyro_dps * std::sin(ph + 0.5);
    }
  }
  const Vec3 truth = s.body_accel_g + Vec3{0.0, 0.0, vib_a};

  auto read_accel = [&](double range, double sigma, bool& saturated) {
    Vec3 v{truth.x + noise(rng, p, sigma), truth.y + noise(rng, p, sigma), truth.z + noise(rng, p, sigma)};
    saturated = std::abs(v.x) >= range || std::abs(v.y) >= range || std::abs(v.z) >= range;
    return Vec3{saturate(v.x, range), saturate(v.y, range), saturate(v.z, range)};
  };
  out.accel_precise = read_accel(p.accel_precise_range_g, p.accel_precise_noise_g, out.accel_precise_saturated);
  out.accel_highload = read_accel(p.accel_highload_range_g, p.accel_highload_noise_g, out.accel_highload_saturated);

  out.gyro_dps = {saturate(noise(rng, p, p.gyro_noise_dps), p.gyro_range_dps),
                  saturate(noise(rng, p, p.gyro_noise_dps), p.gyro_range_dps),
                  saturate(vib_g + noise(rng, p, p.gyro_noise_dps), p.gyro_range_dps)};

  const double pressure = atmosphere(s.position.z).pressure_mbar;
  const double e_precise = std::clamp(noise(rng, p, p.baro_precise_noise_mbar), -p.baro_precise_accuracy_mbar,
                                      p.baro_precise_accuracy_mbar);
  const double e_wide =
      std::clamp(noise(rng, p, p.baro_wide_noise_mbar), -p.baro_wide_accuracy_mbar, p.baro_wide_accuracy_mbar);
  if (pressure >= p.baro_precise_min_mbar && pressure <= p.baro_precise_max_mbar) {
    out.baro_precise_mbar = pressure + e_precise;
  }
  out.baro_wide_mbar = std::clamp(pressure + e_wide, 0.0, p.baro_wide_max_mbar);

  out.gps = gps_solution(s, rng, p, origin);
  out.tachometer_hz = std::max(0.0, s.rotor_rate_hz + (s.rotor_rate_hz > 0.0 ? noise(rng, p, p.tachometer_noise_hz) : 0.0));
  return out;
}

SensorSuite::SensorSuite(kernel::RngStream rng, SensorParams params, GeoPoint origin)
    : rng_(std::move(rng)), params_(params), origin_(origin) {}

SensorSample SensorSuite::sample(const TrajectoryState& state) {
  SensorSample s = sample_sensors(state, rng_, params_, origin_);
  const auto epoch = static_cast<long long>(std::floor(state.time_s * params_.gps_rate_hz + 1e-9));
  if (epoch != last_gps_epoch_) {
    last_gps_epoch_ = epoch;
    last_fix_ = s.gps;
  } else {
    s.gps = last_fix_;
  }
  return s;
}

}  // namespace seedsim::flight
