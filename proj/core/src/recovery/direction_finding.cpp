#include "seedsim/recovery/direction_finding.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace seedsim::recovery {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

BearingEstimate estimate_bearing(std::span<const RssiSample> samples) {
  BearingEstimate est;
  est.samples.assign(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::vector<double> p(n, 0.0);
  bool heard = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i].rssi_dbm) {
      p[i] = std::pow(10.0, *samples[i].rssi_dbm / 10.0);
      heard = true;
    }
  }
  if (!heard) throw Error(Errc::NoSignal, "no beacon received during scan");

  double a0 = 0.0, c = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = samples[i].heading_deg * kDeg;
    a0 += p[i];
    c += p[i] * std::cos(h);
    s += p[i] * std::sin(h);
  }
  a0 /= double(n);
  const double a1 = 2.0 * c / double(n), b1 = 2.0 * s / double(n);
  double bearing = std::atan2(b1, a1) / kDeg;
  if (bearing < 0.0) bearing += 360.0;
  est.bearing_deg = bearing >= 360.0 ? bearing - 360.0 : bearing;

  const double amp = std::hypot(a1, b1);
  if (amp <= 0.0 || n < 4) return est;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = samples[i].heading_deg * kDeg;
    const double r = p[i] - (a0 + a1 * std::cos(h) + b1 * std::sin(h));
    sse += r * r;
  }
  const double sigma_r = std::sqrt(sse / double(n - 3));
  // Phase error of a harmonic fit: sigma / (A sqrt(n/2)); report two sigma.
  const double sigma_phase = sigma_r / (amp * std::sqrt(double(n) / 2.0));
  est.confidence_deg = std::min(180.0, 2.0 * sigma_phase / kDeg);
  return est;
}

BearingEstimate scan_rotation(const Vec3& device, const Vec3& seed, const ScanParams& params,
                              kernel::RngStream* noise) {
  if (!(params.step_deg > 0.0) || params.step_deg > 180.0) {
    throw Error(Errc::ScenarioError, "scan step must be in (0, 180] degrees");
  }
  const int n = static_cast<int>(std::lround(360.0 / params.step_deg));
  std::vector<RssiSample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RssiSample s;
    s.heading_deg = std::fmod(params.start_heading_deg + i * 360.0 / n, 360.0);
    s.rssi_dbm = transport::lora_receive(params.lora, seed, device, s.heading_deg, params.pattern, noise);
    samples.push_back(s);
  }
  return estimate_bearing(samples);
}

const char* to_string(LocateOutcome o) {
  return o == LocateOutcome::Converged ? "converged" : "max-steps-exceeded";
}

void LocateResult::require_converged() const {
  if (outcome != LocateOutcome::Converged) {
    throw Error(Errc::MaxStepsExceeded,
                fmt::format("not within capture radius after {} steps ({:.1f} m left)", steps, final_distance_m));
  }
}

LocateResult locate(const Vec3& start, const Vec3& seed, const LocateParams& params, kernel::RngStream* noise) {
  if (!(params.step_m > 0.0) || params.capture_radius_m < 0.0) {
    throw Error(Errc::ScenarioError, "locate needs a positive step length");
  }
  LocateResult out;
  Vec3 pos = start;
  double t = 0.0;
  const double scan_time = params.scan.lora.beacon_interval_s * std::lround(360.0 / params.scan.step_deg);
  const double walk_time = params.step_m / 1.4;
  out.path.push_back({pos, std::nullopt, 180.0, t, horizontal_distance(pos, seed)});

  while (true) {
    out.final_distance_m = horizontal_distance(pos, seed);
    if (out.final_distance_m <= params.capture_radius_m) {
      out.outcome = LocateOutcome::Converged;
      return out;
    }
    if (out.steps >= params.max_steps) {
      out.outcome = LocateOutcome::MaxStepsExceeded;
      return out;
    }
    ++out.steps;
    t += scan_time;
    PathPoint pt;
    try {
      const BearingEstimate est = scan_rotation(pos, seed, params.scan, noise);
      const double b = est.bearing_deg * kDeg;
      pos += Vec3{std::sin(b), std::cos(b), 0.0} * params.step_m;
      t += walk_time;
      pt.bearing_deg = est.bearing_deg;
      pt.confidence_deg = est.confidence_deg;
    } catch (const Error& e) {
      if (e.code() != Errc::NoSignal) throw;
      ++out.no_signal_scans;
      out.last_error = e.code();
    }
    pt.position = pos;
    pt.time_s = t;
    pt.true_distance_m = horizontal_distance(pos, seed);
    out.path.push_back(pt);
  }
}

std::string path_csv(const LocateResult& r) {
  std::string out = "step,time_s,x_m,y_m,bearing_deg,confidence_deg,distance_m\n";
  for (std::size_t i = 0; i < r.path.size(); ++i) {
    const auto& p = r.path[i];
    out += fmt::format("{},{:.1f},{:.3f},{:.3f},{},{:.2f},{:.3f}\n", i, p.time_s, p.position.x, p.position.y,
                       p.bearing_deg ? fmt::format("{:.3f}", *p.bearing_deg) : std::string(), p.confidence_deg,
                       p.true_distance_m);
  }
  return out;
}

}  // namespace seedsim::recovery
