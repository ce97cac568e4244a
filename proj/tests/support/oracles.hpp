#pragma once

// Reference implementations used only by tests. Each one is written from the textbook
// definition and shares no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

// Bit-at-a-time CRC-16/CCITT-FALSE straight from the polynomial.
inline std::uint16_t crc16_bitwise(const std::uint8_t* data, std::size_t n) {
  std::uint16_t crc = 0xFFFF;
  for (std::size_t i = 0; i < n; ++i) {
    for (int b = 7; b >= 0; --b) {
      const bool in = (data[i] >> b) & 1;
      const bool top = (crc >> 15) & 1;
      crc = std::uint16_t(crc << 1);
      if (in != top) crc ^= 0x1021;
    }
  }
  return crc;
}

// Bit-at-a-time CRC-8/SMBUS.
inline std::uint8_t crc8_bitwise(const std::uint8_t* data, std::size_t n) {
  std::uint8_t crc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int b = 7; b >= 0; --b) {
      const bool in = (data[i] >> b) & 1;
      const bool top = (crc >> 7) & 1;
      crc = std::uint8_t(crc << 1);
      if (in != top) crc ^= 0x07;
    }
  }
  return crc;
}

// O(N^2) DFT.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x, bool inverse = false) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = sign * 2.0 * std::numbers::pi * double((k * t) % n) / double(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// Bus voltage for parallel Thevenin sources feeding P/V + I, by bisection on the
// current balance f(V) = sum (E_k - V)/R_k - P/V - I. Returns the highest root.
inline std::optional<double> bus_voltage_bisect(const std::vector<double>& emf, const std::vector<double>& r,
                                                double power_w, double current_a) {
  auto f = [&](double v) {
    double s = 0.0;
    for (std::size_t k = 0; k < emf.size(); ++k) s += (emf[k] - v) / r[k];
    return s - power_w / v - current_a;
  };
  const double hi0 = *std::max_element(emf.begin(), emf.end());
  // f decreases above the maximum of V * sum(E/R - V/R) - P; scan down for the sign change.
  double hi = hi0;
  if (f(hi) > 0.0) return std::nullopt;
  double lo = hi;
  const double step = hi0 / 4096.0;
  while (lo > step && f(lo) < 0.0) lo -= step;
  if (f(lo) < 0.0) return std::nullopt;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Hydrostatic integration dp/dz = -p g(z) M / (R* T(z)) with classical RK4, using the
// same layer temperature table (geopotential lapse rates) as the 1976 standard.
struct Layer {
  double h_base;  // geopotential m'
  double t_base;  // K
  double lapse;   // K per m'
};
inline const std::array<Layer, 7>& ussa_layers() {
  static const std::array<Layer, 7> l{{{0.0, 288.15, -0.0065},
                                       {11000.0, 216.65, 0.0},
                                       {20000.0, 216.65, 0.001},
                                       {32000.0, 228.65, 0.0028},
                                       {47000.0, 270.65, 0.0},
                                       {51000.0, 270.65, -0.0028},
                                       {71000.0, 214.65, -0.002}}};
  return l;
}

inline double ussa_temperature_geopotential(double h) {
  const auto& l = ussa_layers();
  std::size_t i = 0;
  while (i + 1 < l.size() && h >= l[i + 1].h_base) ++i;
  return l[i].t_base + l[i].lapse * (h - l[i].h_base);
}

// Integrates in geopotential height, where gravity is the constant g0 by definition.
inline double hydrostatic_pressure_pa(double geopotential_m, int steps = 20000) {
  constexpr double g0 = 9.80665, m = 0.0289644, rstar = 8.31432;
  auto dpdh = [&](double h, double p) { return -p * g0 * m / (rstar * ussa_temperature_geopotential(h)); };
  double p = 101325.0, h = 0.0;
  const double dh = geopotential_m / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = dpdh(h, p);
    const double k2 = dpdh(h + dh / 2, p + dh / 2 * k1);
    const double k3 = dpdh(h + dh / 2, p + dh / 2 * k2);
    const double k4 = dpdh(h + dh, p + dh * k3);
    p += dh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    h += dh;
  }
  return p;
}

// Least squares slope of y over x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d < -180.0) d += 360.0;
  return std::abs(d);
}

}  // namespace oracle
