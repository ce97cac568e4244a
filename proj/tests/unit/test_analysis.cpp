#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "expect.hpp"
#include "oracles.hpp"
#include "seedsim/analysis/fft.hpp"
#include "seedsim/analysis/power_report.hpp"
#include "seedsim/analysis/tachometer.hpp"

using namespace seedsim;
using namespace seedsim::analysis;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sines(std::size_t n, double rate, const std::vector<std::pair<double, double>>& parts) {
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [f, a] : parts) x[i] += a * std::sin(kTwoPi * f * double(i) / rate);
  }
  return x;
}

// Rotor vibration model: harmonics 1, 2, 4 of the instantaneous tachometer rate.
TachLog synthetic_log(const std::vector<std::pair<double, double>>& segments, double a4, std::uint64_t seed) {
  TachLog log;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  double phase = 0.0;
  std::size_t i = 0;
  for (const auto& [hz, secs] : segments) {
    const auto count = static_cast<std::size_t>(secs * log.sample_rate);
    for (std::size_t k = 0; k < count; ++k, ++i) {
      phase += kTwoPi * hz / log.sample_rate;
      log.time_s.push_back(double(i) / log.sample_rate);
      log.tachometer.push_back(hz);
      log.accel_z.push_back(1.0 + 0.3 * std::sin(phase) + 0.4 * std::sin(2 * phase) + a4 * std::sin(4 * phase) +
                            noise(rng));
      log.gyro_z.push_back(hz * 360.0 + 2.0 * std::cos(phase) + 3.0 * std::cos(2 * phase) +
                           10.0 * a4 * std::cos(4 * phase) + 10.0 * noise(rng));
    }
  }
  return log;
}

flight::FlashRecord power_record(std::uint64_t t_us, float i1, float i2, float v, float servo) {
  flight::FlashRecord r;
  r.time_us = t_us;
  r.i_bat1 = i1;
  r.i_bat2 = i2;
  r.v_bus = v;
  r.servo_current = servo;
  return r;
}
}  // namespace

TEST(Fft, MatchesNaiveDft) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (std::size_t n : {2u, 4u, 8u, 64u, 256u, 1024u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {d(rng), d(rng)};
    for (bool inv : {false, true}) {
      auto a = x;
      fft_inplace(a, inv);
      auto ref = oracle::naive_dft(x, inv);
      if (inv) {
        for (auto& v : ref) v /= double(n);
      }
      double err = 0.0;
      for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(a[k] - ref[k]));
      EXPECT_LT(err, 1e-9 * double(n)) << n;
    }
  }
}

TEST(Fft, InverseRoundTripAndLinearity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::size_t(1) << (1 + rng() % 11);
    std::vector<std::complex<double>> x(n), y(n), z(n);
    const double alpha = d(rng), beta = d(rng);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {d(rng), d(rng)};
      y[i] = {d(rng), d(rng)};
      z[i] = alpha * x[i] + beta * y[i];
    }
    auto back = x;
    fft_inplace(back);
    fft_inplace(back, true);
    for (std::size_t i = 0; i < n; ++i) ASSERT_LT(std::abs(back[i] - x[i]), 1e-10);
    fft_inplace(x);
    fft_inplace(y);
    fft_inplace(z);
    for (std::size_t i = 0; i < n; ++i) ASSERT_LT(std::abs(z[i] - (alpha * x[i] + beta * y[i])), 1e-9);
  }
}

TEST(Fft, ParsevalForRectangularWindow) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.3, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::size_t(1) << (1 + rng() % 12);
    std::vector<double> x(n);
    double ms = 0.0;
    for (auto& v : x) {
      v = d(rng);
      ms += v * v;
    }
    ms /= double(n);
    const auto s = fft_magnitude(x, 250.0);
    EXPECT_NEAR(s.mean_square(), ms, 1e-10 * ms) << n;
  }
}

TEST(Fft, LengthErrors) {
  std::vector<std::complex<double>> one(1), six(6);
  EXPECT_ERRC(fft_inplace(one), Errc::TooShort);
  EXPECT_ERRC(fft_inplace(six), Errc::BadLength);
  std::vector<double> x(8, 1.0);
  EXPECT_ERRC(fft_magnitude(x, 0.0), Errc::ScenarioError);
  EXPECT_TRUE(is_power_of_two(1024));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(1000));
}

TEST(Spectrum, DcAndBinCentredSine) {
  const std::vector<double> dc(64, 3.0);
  const auto s0 = fft_magnitude(dc, 64.0);
  EXPECT_NEAR(s0.magnitudes[0], 3.0, 1e-12);
  for (std::size_t k = 1; k < s0.magnitudes.size(); ++k) EXPECT_NEAR(s0.magnitudes[k], 0.0, 1e-12);

  const double rate = 250.0;
  const std::size_t n = 1024;
  const double f = 40 * rate / double(n);
  for (Window w : {Window::Rectangular, Window::Hann}) {
    const auto s = fft_magnitude(sines(n, rate, {{f, 1.7}}), rate, w);
    EXPECT_EQ(s.frequencies.size(), n / 2 + 1);
    EXPECT_DOUBLE_EQ(s.bin_hz(), rate / double(n));
    EXPECT_EQ(s.bin_of(f), 40u);
    EXPECT_NEAR(s.magnitudes[40], 1.7, 1e-9) << to_string(w);
    const auto peaks = find_peaks(s, 0.01);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0], 40u);
  }
  EXPECT_EQ(fft_magnitude(dc, 64.0).bin_of(1e6), 32u);
}

TEST(Spectrum, ThreeSinesExample) {
  const double rate = 250.0;
  const auto x = sines(1024, rate, {{8.0, 1.0}, {16.0, 0.5}, {32.0, 2.0}});
  const auto s = fft_magnitude(x, rate, Window::Hann);
  const auto peaks = find_peaks(s, 0.1);
  ASSERT_EQ(peaks.size(), 3u);
  const double bin = s.bin_hz();
  EXPECT_NEAR(s.frequencies[peaks[0]], 8.0, bin);
  EXPECT_NEAR(s.frequencies[peaks[1]], 16.0, bin);
  EXPECT_NEAR(s.frequencies[peaks[2]], 32.0, bin);
  EXPECT_GT(s.magnitudes[peaks[2]], s.magnitudes[peaks[0]]);
  EXPECT_GT(s.magnitudes[peaks[0]], s.magnitudes[peaks[1]]);
}

TEST(Spectrum, HannCoefficientsAndCsv) {
  const auto c = window_coefficients(Window::Hann, 8);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_NEAR(c[4], 1.0, 1e-15);
  EXPECT_NEAR(c[2], 0.5, 1e-15);
  const auto s = fft_magnitude(std::vector<double>(16, 1.0), 16.0);
  const auto csv = spectrum_csv(s);
  EXPECT_EQ(std::size_t(std::count(csv.begin(), csv.end(), '\n')), s.magnitudes.size() + 1);
}

TEST(JudgeSpectrum, PassesOnlyWithDominantFourth) {
  const double rate = 250.0, f = 10.0 * rate / 1024.0;
  auto good = fft_magnitude(sines(1024, rate, {{f, 0.3}, {2 * f, 0.4}, {4 * f, 1.0}}), rate, Window::Hann);
  EXPECT_TRUE(judge_spectrum(good, f, "accel_z").pass);
  auto weak4 = fft_magnitude(sines(1024, rate, {{f, 0.3}, {2 * f, 0.4}, {4 * f, 0.35}}), rate, Window::Hann);
  const auto v = judge_spectrum(weak4, f, "accel_z");
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.diagnostic.find("not dominant"), std::string::npos);
  auto no4 = fft_magnitude(sines(1024, rate, {{f, 0.3}, {2 * f, 0.4}}), rate, Window::Hann);
  EXPECT_FALSE(judge_spectrum(no4, f, "accel_z").pass);
  // Two bins off is outside the +-1 bin acceptance.
  const double off = 2.0 * rate / 1024.0;
  auto shifted = fft_magnitude(sines(1024, rate, {{f, 0.3}, {2 * f, 0.4}, {4 * f + off, 1.0}}), rate, Window::Hann);
  EXPECT_FALSE(judge_spectrum(shifted, f, "accel_z").pass);
  // 4f at or above Nyquist cannot be judged.
  EXPECT_NE(judge_spectrum(good, 40.0, "accel_z").diagnostic.find("Nyquist"), std::string::npos);
}

TEST(Tachometer, RateStepsPassEveryStationaryWindow) {
  const auto log = synthetic_log({{6.0, 20.0}, {9.5, 20.0}, {13.0, 20.0}}, 1.0, 4);
  const auto rep = validate_tachometer(log);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.analysed, 6u);
  EXPECT_EQ(rep.passed, rep.analysed);
  std::size_t straddling = 0;
  for (const auto& w : rep.windows) {
    if (!w.stationary) {
      ++straddling;
      EXPECT_TRUE(w.channels.empty());
      continue;
    }
    ASSERT_EQ(w.channels.size(), 2u);
    for (const auto& c : w.channels) {
      for (const auto& p : c.peaks) {
        ASSERT_TRUE(p.found_hz.has_value());
        EXPECT_LE(std::abs(*p.found_hz - p.expected_hz), 250.0 / 1024.0 + 1e-12);
      }
      EXPECT_GT(c.peaks[2].magnitude, c.peaks[0].magnitude);
      EXPECT_GT(c.peaks[2].magnitude, c.peaks[1].magnitude);
    }
  }
  EXPECT_GE(straddling, 2u);
  ASSERT_TRUE(rep.example_spectrum.has_value());
  EXPECT_EQ(rep.to_json()["passed_windows"], rep.passed);
}

TEST(Tachometer, SuppressedFourthHarmonicFails) {
  const auto log = synthetic_log({{6.0, 20.0}, {9.5, 20.0}}, 0.0, 5);
  const auto rep = validate_tachometer(log);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.analysed, 0u);
  EXPECT_EQ(rep.passed, 0u);
}

TEST(Tachometer, Errors) {
  auto still = synthetic_log({{0.0, 10.0}}, 1.0, 6);
  EXPECT_ERRC(validate_tachometer(still), Errc::NoRotation);
  auto shortlog = synthetic_log({{8.0, 2.0}}, 1.0, 7);
  EXPECT_ERRC(validate_tachometer(shortlog), Errc::TooShort);
  auto ragged = synthetic_log({{8.0, 10.0}}, 1.0, 8);
  ragged.gyro_z.pop_back();
  EXPECT_ERRC(validate_tachometer(ragged), Errc::MissingChannels);
}

TEST(Tachometer, FromFlashRecords) {
  std::vector<flight::FlashRecord> recs(3);
  for (std::size_t i = 0; i < 3; ++i) {
    recs[i].time_us = 4000 * i;
    recs[i].accel_precise = {0, 0, float(i)};
    recs[i].gyro = {0, 0, float(2 * i)};
    recs[i].tachometer = 7.0f;
  }
  const auto log = tach_log_from_records(recs);
  EXPECT_EQ(log.accel_z, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(log.gyro_z, (std::vector<double>{0, 2, 4}));
  EXPECT_DOUBLE_EQ(log.time_s[2], 0.008);
}

TEST(PowerReport, EqualSharingPasses) {
  std::vector<flight::FlashRecord> recs;
  for (int i = 0; i < 100; ++i) {
    const bool pulse = i % 10 < 2;
    recs.push_back(power_record(4000ull * i, pulse ? 1.2f : 0.3f, pulse ? 1.2f : 0.3f, pulse ? 7.6f : 8.0f,
                                pulse ? 1.5f : 0.0f));
  }
  const auto rep = power_report(recs);
  EXPECT_DOUBLE_EQ(rep.equality, 0.0);
  EXPECT_EQ(rep.pulse_samples, 20u);
  EXPECT_FLOAT_EQ(rep.min_bus_voltage_in_pulses, 7.6f);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.to_json()["samples"], 100);
}

TEST(PowerReport, ThreeToOneSplitIsHalfAndFlagged) {
  // |3 - 1| / (3 + 1) = 0.5 per sample.
  std::vector<flight::FlashRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back(power_record(4000ull * i, 0.9f, 0.3f, 8.0f, 0.0f));
  const auto rep = power_report(recs);
  EXPECT_NEAR(rep.equality, 0.5, 1e-6);
  EXPECT_TRUE(rep.imbalance);
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.mean_i_bat1 / rep.mean_i_bat2, 3.0, 1e-6);
}

TEST(PowerReport, UndervoltageDuringPulseFlagged) {
  std::vector<flight::FlashRecord> recs{power_record(0, 0.5f, 0.5f, 8.0f, 0.0f),
                                        power_record(4000, 1.5f, 1.5f, 6.9f, 2.0f),
                                        power_record(8000, 0.5f, 0.5f, 8.0f, 0.0f)};
  const auto rep = power_report(recs);
  EXPECT_TRUE(rep.undervoltage);
  EXPECT_FALSE(rep.imbalance);
  EXPECT_FALSE(rep.pass);
  PowerReportParams lax;
  lax.min_bus_voltage = 6.5;
  EXPECT_TRUE(power_report(recs, lax).pass);
}

TEST(PowerReport, RxsmSuppliedCountsAsShared) {
  std::vector<flight::FlashRecord> recs{power_record(0, 0.0f, 0.0f, 27.0f, 0.0f)};
  const auto rep = power_report(recs);
  EXPECT_EQ(rep.equality, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_ERRC(power_report(std::vector<flight::FlashRecord>{}), Errc::MissingChannels);
  EXPECT_ERRC(power_report(std::vector<flight::FlashRecord>{power_record(0, 1, 1, 0, 0)}), Errc::MissingChannels);
}
