#include "seedsim/flight/atmosphere.hpp"

#include <array>
#include <cmath>

#include "seedsim/error.hpp"

namespace seedsim::flight {

namespace {

constexpr double kG0 = 9.80665;
constexpr double kR0 = 6356766.0;        // effective earth radius for geopotential
constexpr double kRStar = 8.31432;       // J/(mol K), 1976 value
constexpr double kMolarMass = 0.0289644;  // kg/mol
constexpr double kGMR = kG0 * kMolarMass / kRStar;

struct Layer {
  double base_h;   // geopotential m
  double lapse;    // K/m
  double base_t;
  double base_p;   // Pa
};

constexpr std::array<std::pair<double, double>, 7> kLayerDefs{{
    {0.0, -0.0065},
    {11000.0, 0.0},
    {20000.0, 0.0010},
    {32000.0, 0.0028},
    {47000.0, 0.0},
    {51000.0, -0.0028},
    {71000.0, -0.0020},
}};

double layer_pressure(const Layer& l, double h) {
  const double dh = h - l.base_h;
  if (l.lapse == 0.0) return l.base_p * std::exp(-kGMR * dh / l.base_t);
  return l.base_p * std::pow(l.base_t / (l.base_t + l.lapse * dh), kGMR / l.lapse);
}

std::array<Layer, 7> build_layers() {
  std::array<Layer, 7> layers{};
  double t = 288.15, p = 101325.0;
  for (std::size_t i = 0; i < kLayerDefs.size(); ++i) {
    layers[i] = {kLayerDefs[i].first, kLayerDefs[i].second, t, p};
    if (i + 1 < kLayerDefs.size()) {
      const double top = kLayerDefs[i + 1].first;
      p = layer_pressure(layers[i], top);
      t = t + layers[i].lapse * (top - layers[i].base_h);
    }
  }
  return layers;
}

const std::array<Layer, 7>& layers() {
  static const auto kLayers = build_layers();
  return kLayers;
}

AtmosphereSample evaluate(double z) {
  const double h = geopotential_altitude(z);
  const auto& ls = layers();
  std::size_t i = ls.size() - 1;
  while (i > 0 && h < ls[i].base_h) --i;
  const Layer& l = ls[i];
  AtmosphereSample s;
  s.temperature_k = l.base_t + l.lapse * (h - l.base_h);
  const double pa = layer_pressure(l, h);
  s.pressure_mbar = pa / 100.0;
  s.density_kg_m3 = pa * kMolarMass / (kRStar * s.temperature_k);
  return s;
}

}  // namespace

double geopotential_altitude(double geometric_m) { return kR0 * geometric_m / (kR0 + geometric_m); }

AtmosphereSample atmosphere(double altitude_m) {
  if (altitude_m < -500.0) throw Error(Errc::OutOfModel, "altitude below model floor");
  if (altitude_m > kModelCeilingM) {
    AtmosphereSample s = evaluate(kModelCeilingM);
    s.out_of_model = true;
    return s;
  }
  return evaluate(altitude_m);
}

AtmosphereSample atmosphere_strict(double altitude_m) {
  if (altitude_m > kModelCeilingM) throw Error(Errc::OutOfModel, "altitude above 86 km");
  return atmosphere(altitude_m);
}

double pressure_mbar(double altitude_m) { return atmosphere(altitude_m).pressure_mbar; }

double altitude_for_pressure(double mbar) {
  if (mbar <= 0.0) throw Error(Errc::OutOfModel, "pressure must be positive");
  double lo = 0.0, hi = kModelCeilingM;
  if (mbar >= pressure_mbar(lo)) return lo;
  if (mbar <= pressure_mbar(hi)) return hi;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (pressure_mbar(mid) > mbar) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace seedsim::flight
