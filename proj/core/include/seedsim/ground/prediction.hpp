#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "seedsim/geometry.hpp"

namespace seedsim::ground {

struct GpsPoint {
  double t_s = 0.0;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

struct PredictorParams {
  std::size_t window = 5;
  double ground_altitude_m = 0.0;
  double base_radius_m = 50.0;
  /// Multiplier on the standard error of the fitted horizontal velocity.
  double velocity_sigma_k = 3.0;
  /// Fraction of |v_h| * ttl added for sink-rate deceleration below the fix.
  double relative_drift = 1.0;
};

struct LandingPrediction {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double time_to_land_s = 0.0;
  double uncertainty_m = 0.0;
  std::size_t based_on = 0;
  Vec3 velocity;  // fitted east/north/up, m/s

  nlohmann::json to_json() const;
};

/// Least-squares velocity over the last `window` fixes, extrapolated at constant velocity to
/// ground altitude.  InsufficientData for fewer than two fixes or a non-descending fit.
LandingPrediction predict_landing(std::span<const GpsPoint> history, const PredictorParams& params = {});

}  // namespace seedsim::ground
