#pragma once

#include <cstdint>

namespace seedsim::power {

/// One series string of Li/SO2 cells (LO 35 SX class).
struct BatteryParams {
  int cells_series = 3;
  double capacity_ah = 2.2;
  double internal_resistance_ohm = 0.09;
  double continuous_limit_a = 2.0;
  double peak_limit_a = 5.0;
  double min_operating_c = -60.0;
  double max_operating_c = 70.0;
};

enum BatteryWarning : unsigned {
  kWarnNone = 0,
  kWarnContinuousLimit = 1u << 0,
  kWarnPeakLimit = 1u << 1,
  kWarnTemperature = 1u << 2,
  kWarnDepleted = 1u << 3,
};

/// Per-cell open-circuit voltage: 2.0 V empty, flat 2.8 V over 10..90 % state of charge,
/// 2.82 V full, linear in between.
double cell_open_circuit_voltage(double soc);

class BatteryString {
 public:
  explicit BatteryString(BatteryParams params = {}, double soc = 1.0, double temperature_c = 20.0);

  double open_circuit_voltage() const;
  double terminal_voltage(double current_a) const;
  double soc() const { return soc_; }
  double charge_ah() const { return soc_ * params_.capacity_ah; }
  double temperature_c() const { return temperature_c_; }
  const BatteryParams& params() const { return params_; }

  void set_soc(double soc);
  void set_temperature(double celsius) { temperature_c_ = celsius; }
  void set_internal_resistance(double ohm) { params_.internal_resistance_ohm = ohm; }

  /// Coulomb counting; negative currents are ignored (primary cells, no charging path).
  /// Returns BatteryWarning bits for limit excursions during this step.
  unsigned step(double current_a, double dt_s);

 private:
  BatteryParams params_;
  double soc_;
  double temperature_c_;
};

/// Functional form of BatteryString::step.
BatteryString step_battery(BatteryString string, double current_a, double dt_s);

}  // namespace seedsim::power
