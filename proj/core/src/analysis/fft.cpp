#include "seedsim/analysis/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::analysis {

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

std::vector<double> window_coefficients(Window w, std::size_t n) {
  std::vector<double> c(n, 1.0);
  if (w == Window::Hann && n > 1) {
    for (std::size_t i = 0; i < n; ++i) c[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n));
  }
  return c;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::TooShort, fmt::format("transform needs at least 2 samples, got {}", n));
  if (!is_power_of_two(n)) throw Error(Errc::BadLength, fmt::format("transform size {} is not a power of two", n));

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / double(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep rounding error flat.
        const std::complex<double> w(std::cos(ang * double(k)), std::sin(ang * double(k)));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= double(n);
  }
}

std::vector<std::complex<double>> fft(std::span<const double> samples) {
  std::vector<std::complex<double>> a(samples.begin(), samples.end());
  fft_inplace(a);
  return a;
}

std::size_t SpectrumResult::bin_of(double hz) const {
  const long b = std::lround(hz / bin_hz());
  return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(magnitudes.size()) - 1));
}

double SpectrumResult::mean_square() const {
  if (magnitudes.empty()) return 0.0;
  double ms = magnitudes.front() * magnitudes.front();
  const std::size_t last = magnitudes.size() - 1;
  for (std::size_t k = 1; k < last; ++k) ms += 0.5 * magnitudes[k] * magnitudes[k];
  ms += magnitudes[last] * magnitudes[last];
  return ms;
}

SpectrumResult fft_magnitude(std::span<const double> samples, double sample_rate, Window window) {
  if (!(sample_rate > 0.0)) throw Error(Errc::ScenarioError, "sample rate must be positive");
  const std::size_t n = samples.size();
  if (n < 2) throw Error(Errc::TooShort, fmt::format("transform needs at least 2 samples, got {}", n));
  const auto w = window_coefficients(window, n);
  double gain = 0.0;
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = samples[i] * w[i];
    gain += w[i];
  }
  fft_inplace(a);

  SpectrumResult s;
  s.sample_rate = sample_rate;
  s.n = n;
  s.window = window;
  const std::size_t half = n / 2;
  s.frequencies.resize(half + 1);
  s.magnitudes.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    s.frequencies[k] = double(k) * sample_rate / double(n);
    const double m = std::abs(a[k]) / gain;
    s.magnitudes[k] = (k == 0 || k == half) ? m : 2.0 * m;
  }
  return s;
}

std::vector<std::size_t> find_peaks(const SpectrumResult& s, double floor) {
  std::vector<std::size_t> peaks;
  const auto& m = s.magnitudes;
  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    if (m[k] > m[k - 1] && m[k] > m[k + 1] && m[k] > floor) peaks.push_back(k);
  }
  return peaks;
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string out = "frequency_hz,magnitude\n";
  for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
    out += fmt::format("{:.6f},{:.9g}\n", s.frequencies[k], s.magnitudes[k]);
  }
  return out;
}

}  // namespace seedsim::analysis
