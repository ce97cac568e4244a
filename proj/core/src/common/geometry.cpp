#include "seedsim/geometry.hpp"

#include <cmath>
#include <numbers>

namespace seedsim {

namespace {
constexpr double kEarthRadius = 6371000.0;
constexpr double kDeg = std::numbers::pi / 180.0;
}  // namespace

double Vec3::norm() const { return std::hypot(x, y, z); }

double distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double bearing_deg(const Vec3& from, const Vec3& to) {
  double deg = std::atan2(to.x - from.x, to.y - from.y) / kDeg;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

double wrap_deg(double angle) {
  double a = std::fmod(angle, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

GeoPoint to_geodetic(const GeoPoint& origin, const Vec3& local) {
  GeoPoint p;
  p.lat_deg = origin.lat_deg + local.y / kEarthRadius / kDeg;
  p.lon_deg = origin.lon_deg + local.x / (kEarthRadius * std::cos(origin.lat_deg * kDeg)) / kDeg;
  p.alt_m = origin.alt_m + local.z;
  return p;
}

Vec3 to_local(const GeoPoint& origin, const GeoPoint& point) {
  Vec3 v;
  v.y = (point.lat_deg - origin.lat_deg) * kDeg * kEarthRadius;
  v.x = (point.lon_deg - origin.lon_deg) * kDeg * kEarthRadius * std::cos(origin.lat_deg * kDeg);
  v.z = point.alt_m - origin.alt_m;
  return v;
}

}  // namespace seedsim
