#pragma once

#include <string_view>

namespace seedsim::recovery {

enum class PatternType { Omni, Cardioid, YagiLike };

std::string_view to_string(PatternType type) noexcept;

/// Receive antenna gain versus off-boresight angle. Maximal at 0 and symmetric in +-theta.
class AntennaPattern {
 public:
  static AntennaPattern omni();
  /// gain = 10 log10((1 + cos theta) / 2 + epsilon)
  static AntennaPattern cardioid(double epsilon = 1e-3);
  /// Raised cardioid ((1 + cos theta) / 2)^k with k set by the half-power beamwidth.
  static AntennaPattern yagi_like(double beamwidth_deg, double peak_gain_db = 7.0, double epsilon = 1e-3);

  double gain_db(double off_boresight_deg) const;

  PatternType type() const { return type_; }
  double beamwidth_deg() const { return beamwidth_deg_; }
  double peak_gain_db() const { return peak_gain_db_; }

 private:
  AntennaPattern(PatternType type, double beamwidth, double exponent, double peak, double epsilon)
      : type_(type), beamwidth_deg_(beamwidth), exponent_(exponent), peak_gain_db_(peak), epsilon_(epsilon) {}

  PatternType type_;
  double beamwidth_deg_;
  double exponent_;
  double peak_gain_db_;
  double epsilon_;
};

}  // namespace seedsim::recovery
