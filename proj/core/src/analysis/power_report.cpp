#include "seedsim/analysis/power_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seedsim/error.hpp"

namespace seedsim::analysis {

using nlohmann::json;

PowerReport power_report(std::span<const flight::FlashRecord> records, const PowerReportParams& params) {
  if (records.empty()) throw Error(Errc::MissingChannels, "empty log");
  const bool any_bus = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.v_bus > 0.0f; });
  if (!any_bus) throw Error(Errc::MissingChannels, "log carries no power bus data");

  PowerReport rep;
  double sum_diff = 0.0, sum_total = 0.0, sum1 = 0.0, sum2 = 0.0;
  rep.min_bus_voltage = std::numeric_limits<double>::infinity();
  rep.min_bus_voltage_in_pulses = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    const bool pulse = r.servo_current > 0.0f;
    rep.time_s.push_back(double(r.time_us) * 1e-6);
    rep.i_bat1.push_back(r.i_bat1);
    rep.i_bat2.push_back(r.i_bat2);
    rep.v_bus.push_back(r.v_bus);
    rep.in_pulse.push_back(pulse);
    sum_diff += std::abs(double(r.i_bat1) - double(r.i_bat2));
    sum_total += double(r.i_bat1) + double(r.i_bat2);
    sum1 += r.i_bat1;
    sum2 += r.i_bat2;
    rep.min_bus_voltage = std::min(rep.min_bus_voltage, double(r.v_bus));
    if (pulse) {
      ++rep.pulse_samples;
      rep.min_bus_voltage_in_pulses = std::min(rep.min_bus_voltage_in_pulses, double(r.v_bus));
    }
  }
  const double n = double(records.size());
  rep.mean_i_bat1 = sum1 / n;
  rep.mean_i_bat2 = sum2 / n;
  // No battery current at all (RXSM supplied) counts as perfectly shared.
  rep.equality = sum_total > 0.0 ? sum_diff / sum_total : 0.0;
  if (rep.pulse_samples == 0) rep.min_bus_voltage_in_pulses = rep.min_bus_voltage;
  rep.imbalance = rep.equality >= params.equality_bound;
  rep.undervoltage = rep.min_bus_voltage_in_pulses <= params.min_bus_voltage;
  rep.pass = !rep.imbalance && !rep.undervoltage;
  return rep;
}

json PowerReport::to_json() const {
  return {{"pass", pass},
          {"equality", equality},
          {"imbalance", imbalance},
          {"min_bus_voltage", min_bus_voltage},
          {"min_bus_voltage_in_pulses", min_bus_voltage_in_pulses},
          {"undervoltage", undervoltage},
          {"pulse_samples", pulse_samples},
          {"mean_i_bat1", mean_i_bat1},
          {"mean_i_bat2", mean_i_bat2},
          {"samples", time_s.size()}};
}

}  // namespace seedsim::analysis
