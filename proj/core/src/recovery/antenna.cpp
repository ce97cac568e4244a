#include "seedsim/recovery/antenna.hpp"

#include <cmath>
#include <numbers>

#include "seedsim/error.hpp"

namespace seedsim::recovery {

std::string_view to_string(PatternType type) noexcept {
  switch (type) {
    case PatternType::Omni: return "omni";
    case PatternType::Cardioid: return "cardioid";
    case PatternType::YagiLike: return "yagi-like";
  }
  return "?";
}

AntennaPattern AntennaPattern::omni() { return {PatternType::Omni, 360.0, 0.0, 0.0, 0.0}; }

AntennaPattern AntennaPattern::cardioid(double epsilon) {
  return {PatternType::Cardioid, 180.0, 1.0, 0.0, epsilon};
}

AntennaPattern AntennaPattern::yagi_like(double beamwidth_deg, double peak_gain_db, double epsilon) {
  if (beamwidth_deg <= 0.0 || beamwidth_deg >= 180.0) {
    throw Error(Errc::ScenarioError, "yagi-like beamwidth must lie in (0, 180) degrees");
  }
  const double half = beamwidth_deg * 0.5 * std::numbers::pi / 180.0;
  const double exponent = std::log(0.5) / std::log((1.0 + std::cos(half)) / 2.0);
  return {PatternType::YagiLike, beamwidth_deg, exponent, peak_gain_db, epsilon};
}

double AntennaPattern::gain_db(double off_boresight_deg) const {
  if (type_ == PatternType::Omni) return 0.0;
  const double theta = off_boresight_deg * std::numbers::pi / 180.0;
  const double shape = std::pow((1.0 + std::cos(theta)) / 2.0, exponent_);
  return peak_gain_db_ + 10.0 * std::log10(shape + epsilon_);
}

}  // namespace seedsim::recovery
