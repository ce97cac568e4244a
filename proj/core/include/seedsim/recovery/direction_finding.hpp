#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedsim/error.hpp"
#include "seedsim/geometry.hpp"
#include "seedsim/kernel/rng.hpp"
#include "seedsim/recovery/antenna.hpp"
#include "seedsim/transport/lora.hpp"

namespace seedsim::recovery {

struct RssiSample {
  double heading_deg = 0.0;
  std::optional<double> rssi_dbm;  // nullopt: beacon lost
};

struct BearingEstimate {
  double bearing_deg = 0.0;
  double confidence_deg = 180.0;  // half-width
  std::vector<RssiSample> samples;
};

/// Bearing of the first circular harmonic of received power (linear mW, lost samples as 0).
/// NoSignal if every sample was lost.
BearingEstimate estimate_bearing(std::span<const RssiSample> samples);

struct ScanParams {
  double step_deg = 10.0;
  double start_heading_deg = 0.0;
  AntennaPattern pattern = AntennaPattern::cardioid();
  transport::LoRaParams lora;
};

/// Turns on the spot through 360 degrees, one beacon per heading.  noise may be null.
BearingEstimate scan_rotation(const Vec3& device, const Vec3& seed, const ScanParams& params,
                              kernel::RngStream* noise);

struct LocateParams {
  double step_m = 50.0;
  std::size_t max_steps = 200;
  double capture_radius_m = 25.0;
  ScanParams scan;
};

enum class LocateOutcome { Converged, MaxStepsExceeded };
const char* to_string(LocateOutcome o);

struct PathPoint {
  Vec3 position;
  std::optional<double> bearing_deg;  // nullopt: scan heard nothing
  double confidence_deg = 180.0;
  double time_s = 0.0;
  double true_distance_m = 0.0;
};

struct LocateResult {
  LocateOutcome outcome = LocateOutcome::MaxStepsExceeded;
  std::vector<PathPoint> path;  // starts with the initial position
  std::size_t steps = 0;
  std::size_t no_signal_scans = 0;
  std::optional<Errc> last_error;
  double final_distance_m = 0.0;

  /// Throws MaxStepsExceeded unless converged.
  void require_converged() const;
};

/// Scan, walk one step along the estimate, repeat until within the capture radius.
/// A scan that hears nothing leaves the device in place and still counts as a step.
LocateResult locate(const Vec3& start, const Vec3& seed, const LocateParams& params, kernel::RngStream* noise);

std::string path_csv(const LocateResult& result);

}  // namespace seedsim::recovery
