#include "seedsim/analysis/tachometer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::analysis {

using nlohmann::json;

TachLog tach_log_from_records(std::span<const flight::FlashRecord> records, double sample_rate) {
  TachLog log;
  log.sample_rate = sample_rate;
  for (const auto& r : records) {
    log.time_s.push_back(double(r.time_us) * 1e-6);
    log.accel_z.push_back(r.accel_precise[2]);
    log.gyro_z.push_back(r.gyro[2]);
    log.tachometer.push_back(r.tachometer);
  }
  return log;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<double> detrended(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= mean;
  return out;
}

}  // namespace

ChannelVerdict judge_spectrum(const SpectrumResult& s, double f, const std::string& channel, const TachParams& p) {
  ChannelVerdict v;
  v.channel = channel;
  const double floor = p.floor_factor * median(s.magnitudes);
  const int orders[3] = {1, 2, 4};
  std::vector<std::string> problems;
  for (int i = 0; i < 3; ++i) {
    HarmonicPeak& hp = v.peaks[static_cast<std::size_t>(i)];
    hp.order = orders[i];
    hp.expected_hz = orders[i] * f;
    if (hp.expected_hz >= s.sample_rate / 2.0) {
      problems.push_back(fmt::format("{}f={:.2f} Hz above Nyquist", orders[i], hp.expected_hz));
      continue;
    }
    const auto centre = static_cast<long>(std::lround(hp.expected_hz / s.bin_hz()));
    std::optional<std::size_t> best;
    for (long b = centre - 1; b <= centre + 1; ++b) {
      if (b < 1 || b + 1 >= static_cast<long>(s.magnitudes.size())) continue;
      const auto k = static_cast<std::size_t>(b);
      const bool local_max = s.magnitudes[k] > s.magnitudes[k - 1] && s.magnitudes[k] > s.magnitudes[k + 1];
      if (local_max && s.magnitudes[k] > floor && (!best || s.magnitudes[k] > s.magnitudes[*best])) best = k;
    }
    if (best) {
      hp.found_hz = s.frequencies[*best];
      hp.magnitude = s.magnitudes[*best];
    } else {
      problems.push_back(fmt::format("no peak within 1 bin of {}f={:.2f} Hz", orders[i], hp.expected_hz));
    }
  }
  if (problems.empty()) {
    if (v.peaks[2].magnitude > v.peaks[0].magnitude && v.peaks[2].magnitude > v.peaks[1].magnitude) {
      v.pass = true;
    } else {
      problems.push_back(fmt::format("4f peak ({:.4g}) not dominant over f ({:.4g}) and 2f ({:.4g})",
                                     v.peaks[2].magnitude, v.peaks[0].magnitude, v.peaks[1].magnitude));
    }
  }
  for (std::size_t i = 0; i < problems.size(); ++i) v.diagnostic += (i ? "; " : "") + problems[i];
  return v;
}

TachReport validate_tachometer(const TachLog& log, const TachParams& p) {
  const std::size_t n = log.tachometer.size();
  if (log.accel_z.size() != n || log.gyro_z.size() != n) {
    throw Error(Errc::MissingChannels, "tachometer, accel_z and gyro_z must have equal length");
  }
  if (n < p.window) throw Error(Errc::TooShort, fmt::format("log has {} samples, window is {}", n, p.window));
  const double peak_tach = *std::max_element(log.tachometer.begin(), log.tachometer.end());
  if (peak_tach < p.min_rotor_hz) throw Error(Errc::NoRotation, "tachometer shows no rotation");

  TachReport report;
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(double(p.window) * (1.0 - p.overlap)));
  for (std::size_t start = 0; start + p.window <= n; start += hop) {
    WindowVerdict w;
    w.start = start;
    w.start_time_s = log.time_s.empty() ? double(start) / log.sample_rate : log.time_s[start];
    const auto tach = std::span(log.tachometer).subspan(start, p.window);
    const auto [lo, hi] = std::minmax_element(tach.begin(), tach.end());
    w.tach_mean_hz = std::accumulate(tach.begin(), tach.end(), 0.0) / double(tach.size());
    w.tach_spread_hz = *hi - *lo;
    w.stationary = w.tach_spread_hz <= p.stationary_tolerance_hz && w.tach_mean_hz >= p.min_rotor_hz;
    if (w.stationary) {
      bool all = true;
      for (const auto& [name, channel] : {std::pair{"accel_z", &log.accel_z}, std::pair{"gyro_z", &log.gyro_z}}) {
        const auto x = detrended(std::span(*channel).subspan(start, p.window));
        const auto spec = fft_magnitude(x, log.sample_rate, p.taper);
        if (!report.example_spectrum && std::string(name) == "accel_z") report.example_spectrum = spec;
        auto verdict = judge_spectrum(spec, w.tach_mean_hz, name, p);
        all = all && verdict.pass;
        w.channels.push_back(std::move(verdict));
      }
      ++report.analysed;
      if (all) ++report.passed;
    }
    report.windows.push_back(std::move(w));
  }
  report.pass = report.analysed > 0 && report.passed == report.analysed;
  return report;
}

json TachReport::to_json() const {
  json wins = json::array();
  for (const auto& w : windows) {
    json chans = json::array();
    for (const auto& c : w.channels) {
      json peaks = json::array();
      for (const auto& hp : c.peaks) {
        peaks.push_back({{"order", hp.order},
                         {"expected_hz", hp.expected_hz},
                         {"found_hz", hp.found_hz ? json(*hp.found_hz) : json(nullptr)},
                         {"magnitude", hp.magnitude}});
      }
      chans.push_back({{"channel", c.channel}, {"pass", c.pass}, {"peaks", peaks}, {"diagnostic", c.diagnostic}});
    }
    wins.push_back({{"start_time_s", w.start_time_s},
                    {"tach_mean_hz", w.tach_mean_hz},
                    {"tach_spread_hz", w.tach_spread_hz},
                    {"stationary", w.stationary},
                    {"channels", chans}});
  }
  return {{"pass", pass}, {"analysed_windows", analysed}, {"passed_windows", passed}, {"windows", wins}};
}

}  // namespace seedsim::analysis
