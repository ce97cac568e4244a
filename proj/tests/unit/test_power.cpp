#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expect.hpp"
#include "oracles.hpp"
#include "seedsim/power/battery.hpp"
#include "seedsim/power/power_system.hpp"

using namespace seedsim;
using namespace seedsim::power;

namespace {
DisableLatch latched(bool b1, bool b2) {
  DisableLatch l;
  l.set_dis_bat1(b1);
  l.set_dis_bat2(b2);
  l.pulse_clock();
  return l;
}

void expect_rel(double actual, double expected, double rel) {
  EXPECT_LE(std::abs(actual - expected), rel * std::abs(expected)) << actual << " vs " << expected;
}
}  // namespace

TEST(DiodeLoss, SchottkyAndMosfetAtTwoAmps) {
  // Schottky: P = V_drop * I. Back-to-back FET pair: P = 2 * I^2 * R_ds(on).
  const double i = 2.0, vdrop = 0.400, rds = 0.005;
  expect_rel(diode_loss(DiodeMode::Schottky, i), vdrop * i, 1e-12);
  expect_rel(diode_loss(DiodeMode::IdealMosfet, i), 2.0 * i * i * rds, 1e-12);
  expect_rel(diode_loss(DiodeMode::Schottky, i), 0.8, 1e-12);
  expect_rel(diode_loss(DiodeMode::IdealMosfet, i), 0.04, 1e-12);
}

TEST(DiodeLoss, PeakCurrentAndZero) {
  expect_rel(diode_loss(DiodeMode::Schottky, 5.0), 2.0, 1e-12);
  expect_rel(diode_loss(DiodeMode::IdealMosfet, 5.0), 0.25, 1e-12);
  EXPECT_EQ(diode_loss(DiodeMode::Schottky, 0.0), 0.0);
  EXPECT_EQ(diode_loss(DiodeMode::IdealMosfet, 0.0), 0.0);
  EXPECT_ERRC(diode_loss(DiodeMode::Schottky, -1.0), Errc::ScenarioError);
}

TEST(DiodeLoss, MosfetBelowSchottkyUpToCrossover) {
  // 2 I^2 R = V I crosses at I = V / (2R) = 40 A.
  for (double i = 0.01; i < 40.0; i += 0.37) {
    EXPECT_LT(diode_loss(DiodeMode::IdealMosfet, i), diode_loss(DiodeMode::Schottky, i));
  }
}

TEST(DisableLatch, FollowsDOnlyOnRisingEdge) {
  DisableLatch l;
  l.set_dis_bat1(true);
  EXPECT_FALSE(l.q1());
  l.set_ff_clk(true);
  EXPECT_TRUE(l.q1());
  EXPECT_FALSE(l.q2());
  l.set_dis_bat1(false);
  l.set_ff_clk(true);  // level, not an edge
  EXPECT_TRUE(l.q1());
  l.set_ff_clk(false);
  EXPECT_TRUE(l.q1());
  l.set_ff_clk(true);
  EXPECT_FALSE(l.q1());
}

TEST(SelectSources, RxsmWinsOverBatteries) {
  EXPECT_EQ(select_sources(8.40, 8.40, 28.0, {}), (SourceSet{Source::Rxsm}));
}

TEST(SelectSources, BatteriesShareWithinHysteresis) {
  EXPECT_EQ(select_sources(8.40, 8.39, 0.0, {}), (SourceSet{Source::Bat1, Source::Bat2}));
  EXPECT_EQ(select_sources(8.4, 8.0, 0.0, {}), (SourceSet{Source::Bat1}));
  EXPECT_EQ(select_sources(8.38, 8.40, 0.0, {}), (SourceSet{Source::Bat1, Source::Bat2}));
}

TEST(SelectSources, BothLatchesWithoutRxsmIsNoSource) {
  EXPECT_ERRC(select_sources(8.4, 8.4, 0.0, latched(true, true)), Errc::NoSource);
  EXPECT_EQ(select_sources(8.4, 8.4, 28.0, latched(true, true)), (SourceSet{Source::Rxsm}));
  EXPECT_EQ(select_sources(8.4, 8.4, 0.0, latched(true, false)), (SourceSet{Source::Bat2}));
}

TEST(SelectSources, BelowMinimumInputIgnored) {
  EXPECT_ERRC(select_sources(5.9, 5.99, 0.0, {}), Errc::NoSource);
  EXPECT_EQ(select_sources(5.9, 6.0, 0.0, {}), (SourceSet{Source::Bat2}));
  EXPECT_ERRC(select_sources(-1.0, 8.0, 0.0, {}), Errc::ScenarioError);
}

TEST(SelectSources, PropertyMaxEnabledAlwaysConducts) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> v(0.0, 40.0);
  for (int n = 0; n < 20000; ++n) {
    const double v1 = v(rng), v2 = v(rng), vr = (n % 3 == 0) ? 0.0 : v(rng);
    const auto l = latched(rng() & 1, rng() & 1);
    const std::array<double, 3> vs{v1, v2, vr};
    const std::array<bool, 3> ok{!l.q1(), !l.q2(), true};
    double vmax = -1;
    for (int k = 0; k < 3; ++k)
      if (ok[k] && vs[k] >= 6.0) vmax = std::max(vmax, vs[k]);
    if (vmax < 0) {
      EXPECT_ERRC(select_sources(v1, v2, vr, l), Errc::NoSource);
      continue;
    }
    const auto set = select_sources(v1, v2, vr, l);
    for (int k = 0; k < 3; ++k) {
      const bool expect = ok[k] && vs[k] >= 6.0 && vmax - vs[k] <= 0.020;
      ASSERT_EQ(set.has(Source(k)), expect);
    }
  }
}

TEST(SolveBus, MatchesBisectionOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> e(7.0, 30.0), r(0.05, 0.5), p(0.0, 20.0), i(0.0, 3.0);
  int compared = 0;
  for (int n = 0; n < 3000; ++n) {
    // Same emf everywhere so no source is reverse biased and the oracle's model applies.
    const double emf = e(rng);
    const std::array<double, 3> emfs{emf, emf, emf};
    const std::array<double, 3> rs{r(rng), r(rng), r(rng)};
    const LoadDemand load{p(rng), i(rng)};
    const auto sol = solve_bus(emfs, rs, SourceSet{Source::Bat1, Source::Bat2, Source::Rxsm}, load, 0.0);
    const auto ref = oracle::bus_voltage_bisect({emf, emf, emf}, {rs[0], rs[1], rs[2]}, load.power_w, load.current_a);
    ASSERT_EQ(sol.powered, ref.has_value());
    if (!ref) continue;
    ++compared;
    EXPECT_NEAR(sol.bus_voltage, *ref, 1e-9 * emf);
  }
  EXPECT_GT(compared, 2500);
}

TEST(SolveBus, ReverseBiasedSourceDropped) {
  // 8.4 V battery next to 28 V: the battery would sink current, so it is blocked.
  const auto sol = solve_bus({8.4, 8.4, 28.0}, {0.1, 0.1, 0.09}, SourceSet{Source::Bat1, Source::Bat2, Source::Rxsm},
                             {3.0, 0.0});
  ASSERT_TRUE(sol.powered);
  EXPECT_EQ(sol.conducting, SourceSet{Source::Rxsm});
  EXPECT_EQ(sol.currents[0], 0.0);
  const auto ref = oracle::bus_voltage_bisect({28.0}, {0.09}, 3.0, 0.0);
  EXPECT_NEAR(sol.bus_voltage, *ref, 1e-9);
}

TEST(SolveBus, CollapseIsUnpowered) {
  // Max deliverable power from 8.4 V behind 0.1 ohm is E^2/(4R) = 176.4 W.
  EXPECT_FALSE(solve_bus({8.4, 0, 0}, {0.1, 1, 1}, SourceSet{Source::Bat1}, {177.0, 0.0}).powered);
  EXPECT_TRUE(solve_bus({8.4, 0, 0}, {0.1, 1, 1}, SourceSet{Source::Bat1}, {170.0, 0.0}, 0.0).powered);
  // Bus sags below the 6 V minimum.
  EXPECT_FALSE(solve_bus({8.4, 0, 0}, {0.1, 1, 1}, SourceSet{Source::Bat1}, {0.0, 25.0}).powered);
}

TEST(PowerSystem, EnergyBalanceAndKirchhoffProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> soc(0.0, 1.0), rint(0.05, 0.4), vr(0.0, 35.0), pw(0.0, 15.0), ia(0.0, 2.5);
  int powered = 0;
  for (int n = 0; n < 5000; ++n) {
    PowerParams pp;
    pp.battery1.internal_resistance_ohm = rint(rng);
    pp.battery2.internal_resistance_ohm = rint(rng);
    pp.soc1 = soc(rng);
    pp.soc2 = soc(rng);
    PowerSystem ps(pp);
    ps.set_rxsm_voltage(n % 2 ? vr(rng) : 0.0);
    if (rng() % 4 == 0) {
      ps.latch().set_dis_bat1(rng() & 1);
      ps.latch().set_dis_bat2(rng() & 1);
      ps.latch().pulse_clock();
    }
    const LoadDemand load{pw(rng), ia(rng)};
    const auto s = ps.evaluate(load);
    if (!s.powered) {
      EXPECT_EQ(s.battery_current() + s.i_rxsm, 0.0);
      continue;
    }
    ++powered;
    const double supplied = s.v_bat1 * s.i_bat1 + s.v_bat2 * s.i_bat2 + s.v_rxsm * s.i_rxsm;
    EXPECT_NEAR(supplied, s.load_w + s.dissipation_w, 1e-9 * std::max(1.0, supplied));
    EXPECT_NEAR(s.i_bat1 + s.i_bat2 + s.i_rxsm, load.power_w / s.bus_voltage + load.current_a, 1e-9);
    for (Source k : {Source::Bat1, Source::Bat2, Source::Rxsm}) {
      EXPECT_GE(s.current(k), 0.0);
      if (!s.enabled.has(k)) { EXPECT_EQ(s.current(k), 0.0); }
      if (s.conducting.has(k)) {
        EXPECT_NEAR(s.source_voltage(k) - s.current(k) * ps.path_resistance(k), s.bus_voltage, 1e-9);
      } else {
        EXPECT_EQ(s.current(k), 0.0);
      }
    }
    EXPECT_GE(s.bus_voltage, 6.0);
  }
  EXPECT_GT(powered, 2000);
}

TEST(PowerSystem, MatchedStringsShareEqually) {
  PowerParams pp;
  pp.battery1.internal_resistance_ohm = pp.battery2.internal_resistance_ohm = 0.09;
  PowerSystem ps(pp);
  ps.set_rxsm_voltage(0.0);
  const auto s = ps.evaluate({4.0, 1.0});
  EXPECT_EQ(s.conducting, (SourceSet{Source::Bat1, Source::Bat2}));
  EXPECT_NEAR(s.i_bat1, s.i_bat2, 1e-12);
}

TEST(PowerSystem, CurrentsSplitInverseToPathResistance) {
  // Equal emf, resistive divider: currents inversely proportional to path resistance.
  PowerParams pp;
  pp.battery1.internal_resistance_ohm = 0.09;
  pp.battery2.internal_resistance_ohm = 0.27;
  PowerSystem ps(pp);
  ps.set_rxsm_voltage(0.0);
  const auto s = ps.evaluate({4.0, 1.0});
  const double r1 = ps.path_resistance(Source::Bat1), r2 = ps.path_resistance(Source::Bat2);
  EXPECT_NEAR(s.i_bat2 / s.i_bat1, r1 / r2, 1e-12);
}

TEST(PowerSystem, SeamlessSwitchoverAtRandomSeparationTimes) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> te(0.5, 9.5);
  for (int trial = 0; trial < 100; ++trial) {
    PowerSystem ps;
    const double t_sep = te(rng);
    const double dt = 0.004;
    bool separated = false;
    for (double t = 0.0; t < 10.0; t += dt) {
      if (!separated && t >= t_sep) {
        ps.set_rxsm_voltage(0.0);
        separated = true;
      }
      const auto s = ps.step({3.0, (std::fmod(t, 1.0) < 0.3) ? 1.2 : 0.0}, t, dt);
      bool any_enabled_up = false;
      for (Source k : {Source::Bat1, Source::Bat2, Source::Rxsm}) {
        if (s.enabled.has(k) && s.source_voltage(k) > 6.0) any_enabled_up = true;
      }
      if (any_enabled_up) { ASSERT_GT(s.bus_voltage, 0.0) << "trial " << trial << " t=" << t; }
      if (separated && std::abs(s.v_bat1 - s.v_bat2) < 0.020) {
        ASSERT_EQ(s.conducting, (SourceSet{Source::Bat1, Source::Bat2}));
      }
      if (!separated) { ASSERT_EQ(s.conducting, SourceSet{Source::Rxsm}); }
    }
  }
}

TEST(PowerSystem, LatchedStringCarriesNoCurrent) {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 500; ++n) {
    PowerSystem ps;
    ps.set_rxsm_voltage((n % 2) ? 28.0 : 0.0);
    const bool l1 = rng() & 1, l2 = rng() & 1;
    ps.latch().set_dis_bat1(l1);
    ps.latch().set_dis_bat2(l2);
    ps.latch().pulse_clock();
    const auto s = ps.step({double(rng() % 10), 0.5}, 0.0, 0.1);
    if (l1) { EXPECT_EQ(s.i_bat1, 0.0); }
    if (l2) { EXPECT_EQ(s.i_bat2, 0.0); }
    if (l1 && l2 && n % 2 == 0) { EXPECT_FALSE(s.powered); }
  }
}

TEST(Battery, CoulombCountingToEmpty) {
  BatteryString b;
  const auto after = step_battery(b, 2.2, 3600.0);
  EXPECT_NEAR(after.soc(), 0.0, 1e-12);
  auto c = b;
  for (int i = 0; i < 3600; ++i) c.step(2.2, 1.0);
  EXPECT_NEAR(c.soc(), 0.0, 1e-9);
}

TEST(Battery, ZeroCurrentUnchanged) {
  BatteryString b({}, 0.6);
  const auto after = step_battery(b, 0.0, 100.0);
  EXPECT_EQ(after.soc(), 0.6);
  EXPECT_EQ(step_battery(b, -1.0, 10.0).soc(), 0.6);
}

TEST(Battery, TerminalVoltageNearFullAtQuarterAmp) {
  BatteryString b({}, 0.9);
  EXPECT_NEAR(b.terminal_voltage(0.25), 3 * 2.8, 0.05);
}

TEST(Battery, WarningsAndDepletion) {
  BatteryString b({}, 0.001);
  EXPECT_EQ(b.step(1.0, 0.1), kWarnNone);
  EXPECT_TRUE(b.step(2.5, 0.1) & kWarnContinuousLimit);
  EXPECT_TRUE(b.step(6.0, 0.1) & kWarnPeakLimit);
  EXPECT_TRUE(b.step(2.0, 100.0) & kWarnDepleted);
  EXPECT_EQ(b.open_circuit_voltage(), 0.0);
  b.set_temperature(-70.0);
  BatteryString cold({}, 1.0, -70.0);
  EXPECT_TRUE(cold.step(0.1, 1.0) & kWarnTemperature);
  EXPECT_ERRC(b.step(1.0, 0.0), Errc::ScenarioError);
}

TEST(Battery, OpenCircuitCurveMonotone) {
  double last = 0.0;
  for (double soc = 0.0; soc <= 1.0; soc += 0.01) {
    const double v = cell_open_circuit_voltage(soc);
    EXPECT_GE(v, last);
    last = v;
  }
  EXPECT_DOUBLE_EQ(cell_open_circuit_voltage(0.5), 2.8);
}

TEST(LoadProfile, PulsesAndValidation) {
  LoadProfile lp{1.0, {{1.0, 0.5, 1.2}, {1.2, 1.0, 0.3}}};
  EXPECT_DOUBLE_EQ(lp.servo_current(0.9), 0.0);
  EXPECT_DOUBLE_EQ(lp.servo_current(1.3), 1.5);
  EXPECT_TRUE(lp.in_pulse(2.1));
  EXPECT_FALSE(lp.in_pulse(2.2));
  LoadProfile bad{-1.0, {}};
  EXPECT_ERRC(bad.validate(), Errc::ScenarioError);
}

TEST(SourceSet, Formatting) {
  EXPECT_EQ(SourceSet{}.str(), "none");
  EXPECT_EQ((SourceSet{Source::Rxsm, Source::Bat1}).str(), "bat1+rxsm");
  EXPECT_EQ(SourceSet::from_bits(0xFF).size(), 3);
}
