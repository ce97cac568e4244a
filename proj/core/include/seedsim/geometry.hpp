#pragma once

namespace seedsim {

/// Local tangent frame: x east, y north, z up, metres.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double k) const { return {x * k, y * k, z * k}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
  double norm() const;
};

double distance(const Vec3& a, const Vec3& b);
double horizontal_distance(const Vec3& a, const Vec3& b);
/// Degrees clockwise from north of `to` as seen from `from`, in [0, 360).
double bearing_deg(const Vec3& from, const Vec3& to);
/// Wraps to (-180, 180].
double wrap_deg(double angle);

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

/// Esrange launch site.
inline constexpr GeoPoint kDefaultOrigin{67.8932, 21.1069, 330.0};

/// Equirectangular mapping around `origin`; adequate over the ~100 km impact area.
GeoPoint to_geodetic(const GeoPoint& origin, const Vec3& local);
Vec3 to_local(const GeoPoint& origin, const GeoPoint& point);

}  // namespace seedsim
