#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/analysis/fft.hpp"
#include "seedsim/flight/flash_log.hpp"

namespace seedsim::analysis {

/// Evenly sampled channels extracted from a flash log.
struct TachLog {
  double sample_rate = 250.0;
  std::vector<double> time_s;
  std::vector<double> accel_z;
  std::vector<double> gyro_z;
  std::vector<double> tachometer;
};

TachLog tach_log_from_records(std::span<const flight::FlashRecord> records, double sample_rate = 250.0);

struct TachParams {
  std::size_t window = 1024;
  double overlap = 0.5;
  Window taper = Window::Hann;
  /// Windows whose tachometer spread exceeds this are transients and not judged.
  double stationary_tolerance_hz = 0.05;
  double min_rotor_hz = 0.5;
  /// A harmonic peak must exceed this multiple of the window's median magnitude.
  double floor_factor = 5.0;
};

struct HarmonicPeak {
  int order = 1;
  double expected_hz = 0.0;
  std::optional<double> found_hz;
  double magnitude = 0.0;
};

struct ChannelVerdict {
  std::string channel;
  std::array<HarmonicPeak, 3> peaks;  // orders 1, 2, 4
  bool pass = false;
  std::string diagnostic;
};

struct WindowVerdict {
  std::size_t start = 0;
  double start_time_s = 0.0;
  double tach_mean_hz = 0.0;
  double tach_spread_hz = 0.0;
  bool stationary = false;
  std::vector<ChannelVerdict> channels;
};

struct TachReport {
  std::vector<WindowVerdict> windows;
  std::size_t analysed = 0;
  std::size_t passed = 0;
  bool pass = false;
  std::optional<SpectrumResult> example_spectrum;  // accel_z spectrum of the first judged window

  nlohmann::json to_json() const;
};

/// Judges one spectrum against tachometer rate f: peaks within +-1 bin of f, 2f, 4f with 4f largest.
ChannelVerdict judge_spectrum(const SpectrumResult& spectrum, double f_hz, const std::string& channel,
                              const TachParams& params = {});

/// NoRotation when the tachometer never exceeds min_rotor_hz; TooShort below one window.
TachReport validate_tachometer(const TachLog& log, const TachParams& params = {});

}  // namespace seedsim::analysis
