#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "expect.hpp"
#include "seedsim/recovery/direction_finding.hpp"

using namespace seedsim;
using namespace seedsim::recovery;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 at_bearing(const Vec3& from, double bearing_deg, double range_m) {
  return {from.x + range_m * std::sin(bearing_deg * kDeg), from.y + range_m * std::cos(bearing_deg * kDeg), 0.0};
}

double angle_error(double a, double b) { return std::abs(wrap_deg(a - b)); }
}  // namespace

TEST(Antenna, PatternShapes) {
  const auto omni = AntennaPattern::omni();
  for (double t : {0.0, 45.0, 180.0}) EXPECT_EQ(omni.gain_db(t), 0.0);

  const auto card = AntennaPattern::cardioid(1e-3);
  EXPECT_NEAR(card.gain_db(0.0), 10.0 * std::log10(1.001), 1e-12);
  EXPECT_NEAR(card.gain_db(180.0), -30.0, 1e-9);
  EXPECT_NEAR(card.gain_db(90.0), 10.0 * std::log10(0.501), 1e-12);

  const auto yagi = AntennaPattern::yagi_like(60.0, 7.0, 0.0);
  EXPECT_NEAR(yagi.gain_db(0.0), 7.0, 1e-12);
  EXPECT_NEAR(yagi.gain_db(30.0), 7.0 + 10.0 * std::log10(0.5), 1e-9);
  EXPECT_ERRC(AntennaPattern::yagi_like(0.0), Errc::ScenarioError);
  EXPECT_ERRC(AntennaPattern::yagi_like(180.0), Errc::ScenarioError);
}

TEST(Antenna, MaximalAtBoresightAndSymmetric) {
  for (const auto& p : {AntennaPattern::cardioid(), AntennaPattern::yagi_like(40.0), AntennaPattern::yagi_like(120.0)}) {
    double prev = p.gain_db(0.0);
    for (double t = 1.0; t <= 180.0; t += 1.0) {
      EXPECT_LE(p.gain_db(t), prev + 1e-12);
      EXPECT_DOUBLE_EQ(p.gain_db(t), p.gain_db(-t));
      prev = p.gain_db(t);
    }
  }
}

TEST(Bearing, PureFirstHarmonicRecoveredExactly) {
  // p(h) = a0 + A cos(h - b): equally spaced samples recover b to rounding.
  for (double b : {0.0, 17.0, 90.0, 181.5, 359.0}) {
    std::vector<RssiSample> s;
    for (int i = 0; i < 24; ++i) {
      const double h = i * 15.0;
      s.push_back({h, 10.0 * std::log10(2.0 + std::cos((h - b) * kDeg))});
    }
    const auto est = estimate_bearing(s);
    EXPECT_LT(angle_error(est.bearing_deg, b), 1e-9) << b;
    EXPECT_LT(est.confidence_deg, 1e-6);
    EXPECT_GE(est.bearing_deg, 0.0);
    EXPECT_LT(est.bearing_deg, 360.0);
  }
}

TEST(Bearing, AllLostIsNoSignal) {
  std::vector<RssiSample> s{{0.0, std::nullopt}, {90.0, std::nullopt}, {180.0, std::nullopt}};
  EXPECT_ERRC(estimate_bearing(s), Errc::NoSignal);
  ScanParams p;
  EXPECT_ERRC(scan_rotation({0, 0, 0}, {1e7, 0, 0}, p, nullptr), Errc::NoSignal);
}

TEST(Bearing, ZeroNoiseScanHasZeroError) {
  ScanParams p;
  const Vec3 dev{120.0, -40.0, 0.0};
  for (double b = 0.0; b < 360.0; b += 7.5) {
    const auto est = scan_rotation(dev, at_bearing(dev, b, 1000.0), p, nullptr);
    EXPECT_LT(angle_error(est.bearing_deg, b), 1e-9) << b;
  }
}

TEST(Bearing, CardioidExactForAnyScanGeometry) {
  // Property: with every beacon heard the cardioid power is a pure first harmonic.
  kernel::RngStream gen(99, "gen");
  for (int trial = 0; trial < 200; ++trial) {
    ScanParams p;
    p.start_heading_deg = gen.uniform(0.0, 360.0);
    p.step_deg = std::vector<double>{5.0, 10.0, 15.0, 30.0, 45.0}[gen.next_u64() % 5];
    const double b = gen.uniform(0.0, 360.0);
    const Vec3 dev{gen.uniform(-500, 500), gen.uniform(-500, 500), 0.0};
    // Back lobe stays above sensitivity out to about 1 km.
    const auto est = scan_rotation(dev, at_bearing(dev, b, gen.uniform(50.0, 900.0)), p, nullptr);
    EXPECT_LT(angle_error(est.bearing_deg, b), 1e-9) << trial;
  }
}

TEST(Bearing, ExactWhenBearingOnSampledHeading) {
  // Property: samples symmetric about the true bearing cancel the sine term for any symmetric pattern,
  // including lost back-lobe samples.
  kernel::RngStream gen(7, "gen");
  for (int trial = 0; trial < 200; ++trial) {
    ScanParams p;
    p.start_heading_deg = gen.uniform(0.0, 360.0);
    p.step_deg = std::vector<double>{5.0, 10.0, 15.0, 30.0, 45.0}[gen.next_u64() % 5];
    p.pattern = trial % 2 ? AntennaPattern::cardioid() : AntennaPattern::yagi_like(gen.uniform(30.0, 150.0));
    const int n = int(std::lround(360.0 / p.step_deg));
    const double b = std::fmod(p.start_heading_deg + double(gen.next_u64() % n) * p.step_deg, 360.0);
    const Vec3 dev{0, 0, 0};
    const auto est = scan_rotation(dev, at_bearing(dev, b, gen.uniform(50.0, 5000.0)), p, nullptr);
    EXPECT_LT(angle_error(est.bearing_deg, b), 1e-7) << trial;
  }
}

TEST(Bearing, TwoDbNoiseAtOneKilometre) {
  ScanParams p;
  ASSERT_EQ(p.lora.noise_sigma_db, 2.0);
  const Vec3 dev{0, 0, 0};
  int within = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    kernel::RngStream rng(i, "lora");
    const double b = double(i % 360);
    const auto est = scan_rotation(dev, at_bearing(dev, b, 1000.0), p, &rng);
    if (angle_error(est.bearing_deg, b) <= 15.0) ++within;
  }
  EXPECT_GE(within, 900);
}

TEST(Bearing, RejectsBadStep) {
  ScanParams p;
  p.step_deg = 0.0;
  EXPECT_ERRC(scan_rotation({}, {100, 0, 0}, p, nullptr), Errc::ScenarioError);
  p.step_deg = 200.0;
  EXPECT_ERRC(scan_rotation({}, {100, 0, 0}, p, nullptr), Errc::ScenarioError);
}

TEST(Locate, ZeroNoiseWalksStraight) {
  // Steps no longer than the capture diameter cannot jump over the capture circle.
  for (double step : {10.0, 30.0, 50.0}) {
    for (double d : {100.0, 1000.0, 2500.0}) {
      LocateParams lp;
      lp.step_m = step;
      lp.max_steps = 1000;
      const Vec3 seed{0, 0, 0};
      const Vec3 start = at_bearing(seed, 33.0, d);
      const auto r = locate(start, seed, lp, nullptr);
      ASSERT_EQ(r.outcome, LocateOutcome::Converged) << step << " " << d;
      EXPECT_EQ(r.steps, std::size_t(std::ceil((d - lp.capture_radius_m) / step))) << step << " " << d;
      EXPECT_LE(r.final_distance_m, lp.capture_radius_m);
      EXPECT_EQ(r.path.size(), r.steps + 1);
      for (std::size_t i = 1; i < r.path.size(); ++i) {
        EXPECT_NEAR(r.path[i].true_distance_m, d - step * double(i), 1e-4);
        EXPECT_GT(r.path[i].time_s, r.path[i - 1].time_s);
      }
      EXPECT_NO_THROW(r.require_converged());
    }
  }
}

TEST(Locate, StepWiderThanCaptureCircleCanOscillate) {
  LocateParams lp;
  lp.step_m = 75.0;
  lp.max_steps = 100;
  const auto r = locate({0, 1010, 0}, {0, 0, 0}, lp, nullptr);
  EXPECT_EQ(r.outcome, LocateOutcome::MaxStepsExceeded);
  EXPECT_NEAR(r.final_distance_m, 40.0, 1e-6);
}

TEST(Locate, ConvergesFromThreeKilometres) {
  LocateParams lp;
  int ok = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    kernel::RngStream rng(std::uint64_t(1000 + i), "lora");
    const Vec3 seed{0, 0, 0};
    const auto r = locate(at_bearing(seed, i * 1.8, 3000.0), seed, lp, &rng);
    if (r.outcome == LocateOutcome::Converged && r.final_distance_m <= 25.0) ++ok;
  }
  EXPECT_GE(ok, int(std::ceil(0.95 * trials)));
}

TEST(Locate, MaxStepsExceeded) {
  LocateParams lp;
  lp.max_steps = 3;
  const auto r = locate({0, 3000, 0}, {0, 0, 0}, lp, nullptr);
  EXPECT_EQ(r.outcome, LocateOutcome::MaxStepsExceeded);
  EXPECT_EQ(r.steps, 3u);
  EXPECT_NEAR(r.final_distance_m, 3000.0 - 3 * lp.step_m, 1e-6);
  EXPECT_ERRC(r.require_converged(), Errc::MaxStepsExceeded);
}

TEST(Locate, SilentScansCountAsStepsAndHoldPosition) {
  LocateParams lp;
  lp.max_steps = 4;
  const Vec3 start{0, 0, 0};
  const auto r = locate(start, {1e7, 0, 0}, lp, nullptr);
  EXPECT_EQ(r.outcome, LocateOutcome::MaxStepsExceeded);
  EXPECT_EQ(r.no_signal_scans, 4u);
  ASSERT_TRUE(r.last_error.has_value());
  EXPECT_EQ(*r.last_error, Errc::NoSignal);
  for (const auto& p : r.path) {
    EXPECT_EQ(p.position.x, 0.0);
    EXPECT_FALSE(p.bearing_deg.has_value());
  }
  lp.step_m = 0.0;
  EXPECT_ERRC(locate(start, {100, 0, 0}, lp, nullptr), Errc::ScenarioError);
}

TEST(Locate, PathCsvRows) {
  LocateParams lp;
  const auto r = locate({0, 200, 0}, {0, 0, 0}, lp, nullptr);
  const auto csv = path_csv(r);
  EXPECT_EQ(std::size_t(std::count(csv.begin(), csv.end(), '\n')), r.path.size() + 1);
  EXPECT_EQ(csv.rfind("step,time_s", 0), 0u);
}
