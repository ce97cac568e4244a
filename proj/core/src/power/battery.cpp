#include "seedsim/power/battery.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "seedsim/error.hpp"

namespace seedsim::power {

double cell_open_circuit_voltage(double soc) {
  static constexpr std::array<std::pair<double, double>, 4> kCurve{{{0.0, 2.0}, {0.1, 2.8}, {0.9, 2.8}, {1.0, 2.82}}};
  soc = std::clamp(soc, 0.0, 1.0);
  for (std::size_t i = 1; i < kCurve.size(); ++i) {
    if (soc <= kCurve[i].first) {
      const auto [s0, v0] = kCurve[i - 1];
      const auto [s1, v1] = kCurve[i];
      return v0 + (v1 - v0) * (soc - s0) / (s1 - s0);
    }
  }
  return kCurve.back().second;
}

BatteryString::BatteryString(BatteryParams params, double soc, double temperature_c)
    : params_(params), soc_(std::clamp(soc, 0.0, 1.0)), temperature_c_(temperature_c) {
  if (params_.cells_series <= 0 || params_.capacity_ah <= 0.0 || params_.internal_resistance_ohm < 0.0) {
    throw Error(Errc::ScenarioError, "invalid battery parameters");
  }
}

double BatteryString::open_circuit_voltage() const {
  if (soc_ <= 0.0) return 0.0;
  return params_.cells_series * cell_open_circuit_voltage(soc_);
}

double BatteryString::terminal_voltage(double current_a) const {
  return open_circuit_voltage() - std::max(current_a, 0.0) * params_.internal_resistance_ohm;
}

void BatteryString::set_soc(double soc) { soc_ = std::clamp(soc, 0.0, 1.0); }

unsigned BatteryString::step(double current_a, double dt_s) {
  if (dt_s <= 0.0) throw Error(Errc::ScenarioError, "battery step needs dt > 0");
  unsigned warnings = kWarnNone;
  const double i = std::max(current_a, 0.0);
  if (i > params_.peak_limit_a) {
    warnings |= kWarnPeakLimit | kWarnContinuousLimit;
  } else if (i > params_.continuous_limit_a) {
    warnings |= kWarnContinuousLimit;
  }
  if (temperature_c_ < params_.min_operating_c || temperature_c_ > params_.max_operating_c) {
    warnings |= kWarnTemperature;
  }
  soc_ -= i * dt_s / 3600.0 / params_.capacity_ah;
  if (soc_ <= 0.0) {
    soc_ = 0.0;
    if (i > 0.0) warnings |= kWarnDepleted;
  }
  return warnings;
}

BatteryString step_battery(BatteryString string, double current_a, double dt_s) {
  string.step(current_a, dt_s);
  return string;
}

}  // namespace seedsim::power
