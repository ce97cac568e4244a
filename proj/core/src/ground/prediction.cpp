#include "seedsim/ground/prediction.hpp"

#include <algorithm>
#include <cmath>

#include "seedsim/error.hpp"

namespace seedsim::ground {

nlohmann::json LandingPrediction::to_json() const {
  return {{"lat", lat_deg},
          {"lon", lon_deg},
          {"time_to_land_s", time_to_land_s},
          {"uncertainty_m", uncertainty_m},
          {"based_on", based_on},
          {"velocity", {velocity.x, velocity.y, velocity.z}}};
}

namespace {

struct Fit {
  double slope = 0.0;
  double intercept_at_last = 0.0;
  double slope_se = 0.0;
};

Fit fit_line(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= double(n);
  ym /= double(n);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  Fit f;
  f.slope = sty / stt;
  f.intercept_at_last = ym + f.slope * (t[n - 1] - tm);
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (ym + f.slope * (t[i] - tm));
      sse += r * r;
    }
    f.slope_se = std::sqrt(sse / double(n - 2) / stt);
  }
  return f;
}

}  // namespace

LandingPrediction predict_landing(std::span<const GpsPoint> history, const PredictorParams& p) {
  if (history.size() < 2) throw Error(Errc::InsufficientData, "need at least two fixes");
  const std::size_t n = std::min(std::max<std::size_t>(p.window, 2), history.size());
  const auto win = history.last(n);
  const GeoPoint ref{win.back().lat_deg, win.back().lon_deg, 0.0};

  std::vector<double> t(n), x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 v = to_local(ref, {win[i].lat_deg, win[i].lon_deg, win[i].alt_m});
    t[i] = win[i].t_s;
    x[i] = v.x;
    y[i] = v.y;
    z[i] = v.z;
  }
  if (t.back() - t.front() <= 0.0) throw Error(Errc::InsufficientData, "fixes span no time");
  const Fit fx = fit_line(t, x), fy = fit_line(t, y), fz = fit_line(t, z);
  if (fz.slope >= 0.0) throw Error(Errc::InsufficientData, "not descending");

  const double height = fz.intercept_at_last - p.ground_altitude_m;
  LandingPrediction out;
  out.based_on = n;
  out.velocity = {fx.slope, fy.slope, fz.slope};
  out.time_to_land_s = std::max(height, 0.0) / -fz.slope;
  const Vec3 touchdown{fx.intercept_at_last + fx.slope * out.time_to_land_s,
                       fy.intercept_at_last + fy.slope * out.time_to_land_s, 0.0};
  const GeoPoint g = to_geodetic(ref, touchdown);
  out.lat_deg = g.lat_deg;
  out.lon_deg = g.lon_deg;
  const double vh = std::hypot(fx.slope, fy.slope);
  const double se = std::hypot(fx.slope_se, fy.slope_se);
  out.uncertainty_m = p.base_radius_m + out.time_to_land_s * (p.velocity_sigma_k * se + p.relative_drift * vh);
  return out;
}

}  // namespace seedsim::ground
