#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/flight/flash_log.hpp"

namespace seedsim::analysis {

struct PowerReportParams {
  double equality_bound = 0.05;
  double min_bus_voltage = 7.0;
};

struct PowerReport {
  std::vector<double> time_s;
  std::vector<double> i_bat1;
  std::vector<double> i_bat2;
  std::vector<double> v_bus;
  std::vector<bool> in_pulse;
  double equality = 0.0;  // mean |i1 - i2| / mean (i1 + i2)
  double min_bus_voltage = 0.0;
  double min_bus_voltage_in_pulses = 0.0;
  std::size_t pulse_samples = 0;
  double mean_i_bat1 = 0.0;
  double mean_i_bat2 = 0.0;
  bool imbalance = false;
  bool undervoltage = false;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// MissingChannels if the log is empty or carries no bus voltage.
PowerReport power_report(std::span<const flight::FlashRecord> records, const PowerReportParams& params = {});

}  // namespace seedsim::analysis
