#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace seedsim::analysis {

enum class Window { Rectangular, Hann };
const char* to_string(Window w);
std::vector<double> window_coefficients(Window w, std::size_t n);

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 transform (forward: e^{-2 pi i k n / N}).
/// TooShort for n < 2, BadLength unless n is a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse = false);
std::vector<std::complex<double>> fft(std::span<const double> samples);

struct SpectrumResult {
  std::vector<double> frequencies;  // one-sided, N/2 + 1 bins
  std::vector<double> magnitudes;   // single-sided amplitude, window-gain corrected
  double sample_rate = 0.0;
  std::size_t n = 0;
  Window window = Window::Rectangular;

  double bin_hz() const { return sample_rate / double(n); }
  std::size_t bin_of(double hz) const;
  /// Mean-square value implied by the magnitudes (equals the signal's for the rectangular window).
  double mean_square() const;
};

SpectrumResult fft_magnitude(std::span<const double> samples, double sample_rate, Window window = Window::Rectangular);

/// Indices of bins strictly greater than both neighbours and above `floor`.
std::vector<std::size_t> find_peaks(const SpectrumResult& s, double floor = 0.0);

std::string spectrum_csv(const SpectrumResult& s);

}  // namespace seedsim::analysis
