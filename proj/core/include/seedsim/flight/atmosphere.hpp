#pragma once

namespace seedsim::flight {

constexpr double kModelCeilingM = 86000.0;

struct AtmosphereSample {
  double pressure_mbar = 0.0;
  double temperature_k = 0.0;
  double density_kg_m3 = 0.0;
  bool out_of_model = false;  // altitude was clamped to the model ceiling
};

/// US Standard Atmosphere 1976, geometric altitude in metres, 0..86 km.
/// Above the ceiling the result is clamped and flagged; below -500 m throws OutOfModel.
AtmosphereSample atmosphere(double altitude_m);

/// As atmosphere() but throws OutOfModel above the ceiling.
AtmosphereSample atmosphere_strict(double altitude_m);

double pressure_mbar(double altitude_m);

/// Inverse of pressure_mbar on [0, 86 km] by bisection.
double altitude_for_pressure(double mbar);

double geopotential_altitude(double geometric_m);

}  // namespace seedsim::flight
