#include <gtest/gtest.h>

#include <filesystem>

#include "expect.hpp"
#include "seedsim/analysis/power_report.hpp"
#include "seedsim/analysis/tachometer.hpp"
#include "seedsim/mission/mission.hpp"

using namespace seedsim;
using namespace seedsim::mission;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
MissionOptions with_flash() {
  MissionOptions o;
  o.keep_flash = true;
  return o;
}

const ground::IngestRecord* find_status(const std::vector<ground::IngestRecord>& recs, ground::Channel ch,
                                        const std::string& origin, int counter) {
  for (const auto& r : recs) {
    if (r.quarantined() || r.channel != ch || r.message != "seed_status" || r.origin != origin) continue;
    if (r.fields.at("counter").at("value").get<int>() == counter) return &r;
  }
  return nullptr;
}

class NominalMission : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    mission = new Mission(nominal_scenario());
    mission->run();
  }
  static void TearDownTestSuite() {
    delete mission;
    mission = nullptr;
  }
  static Mission* mission;
};
Mission* NominalMission::mission = nullptr;
}  // namespace

TEST_F(NominalMission, SameStatusViaRxsmAndIridium) {
  const auto recs = mission->backend().records();
  for (int seed : {1, 2}) {
    const auto bridge = mission->bridge_status(seed);
    ASSERT_TRUE(bridge.has_value()) << seed;
    const std::string origin = seed == 1 ? "sbc1" : "sbc2";
    const auto* via_rxsm = find_status(recs, ground::Channel::Rxsm, origin, bridge->counter);
    const auto* via_iridium = find_status(recs, ground::Channel::Iridium, origin, bridge->counter);
    ASSERT_NE(via_rxsm, nullptr) << seed;
    ASSERT_NE(via_iridium, nullptr) << seed;
    EXPECT_EQ(via_rxsm->fields, via_iridium->fields);
    EXPECT_LT(via_rxsm->seq, via_iridium->seq);
    // Published before separation.
    EXPECT_LT(bridge->time_s, mission->summary()["sever_time_s"].get<double>());
  }
}

TEST_F(NominalMission, CanProbeAfterEjectionIsBusError) {
  const auto sever = mission->summary()["sever_time_s"].get<double>();
  ASSERT_FALSE(mission->can_probes().empty());
  for (const auto& p : mission->can_probes()) {
    EXPECT_GT(p.time_s, sever);
    EXPECT_EQ(p.status, transport::TxStatus::BusError);
  }
}

TEST_F(NominalMission, CommandsAckedBeforeAndRefusedAfterEjection) {
  const auto cmds = mission->backend().commands();
  ASSERT_EQ(cmds.size(), 1u);
  EXPECT_EQ(cmds[0].state, ground::AckState::Acked);
  EXPECT_EQ(cmds[0].ack_origins.size(), 2u);
  const auto& acts = mission->actions();
  ASSERT_EQ(acts.size(), 3u);
  EXPECT_EQ(acts[2].outcome, "ping PhaseError");
  EXPECT_TRUE(mission->backend().ejected());
}

TEST_F(NominalMission, FlightCompletesOnBatteries) {
  const auto s = mission->summary();
  EXPECT_NEAR(s["sever_time_s"].get<double>(), nominal_scenario().profile.apex_time_s(), 0.5);
  for (int seed : {1, 2}) {
    EXPECT_EQ(mission->phase(seed), flight::MissionPhase::Landed);
    EXPECT_EQ(mission->silence_violations(seed), 0u);
    // Power never drops while a battery is available.
    for (const auto& st : mission->power_trace(seed)) {
      if (st.v_bat1 > 6.0 || st.v_bat2 > 6.0) {
        ASSERT_TRUE(st.powered) << st.time_s;
      }
    }
    // Post-ejection the two batteries share the load.
    const auto& trace = mission->power_trace(seed);
    const auto& last = trace.back();
    EXPECT_EQ(last.i_rxsm, 0.0);
    EXPECT_GT(last.i_bat1, 0.0);
    EXPECT_GT(last.i_bat2, 0.0);
  }
  EXPECT_GT(mission->beacons_heard(), 0u);
}

TEST(Mission, DeterministicForSeed) {
  auto sc = nominal_scenario();
  sc.duration_s = 250.0;
  Mission a(sc), b(sc);
  EXPECT_EQ(a.run(), b.run());
  sc.seed = 2;
  Mission c(sc);
  EXPECT_NE(a.run(), c.run());
}

TEST(Mission, PrelaunchRadioSilence) {
  Mission m(prelaunch_radio_silence_scenario());
  m.run();
  for (int seed : {1, 2}) {
    const auto* tr = m.silence_trace(seed);
    ASSERT_NE(tr, nullptr);
    ASSERT_TRUE(tr->complete());
    ASSERT_EQ(tr->states.size(), 6u);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(int(tr->states[std::size_t(i)].step), i + 1);
    const double latched = tr->states[1].time_s, rearmed = tr->states[5].time_s;
    for (const auto& st : m.power_trace(seed)) {
      if (st.time_s >= latched && st.time_s < rearmed) {
        ASSERT_EQ(st.i_bat1, 0.0) << st.time_s;
        ASSERT_EQ(st.i_bat2, 0.0) << st.time_s;
      }
    }
    EXPECT_EQ(m.silence_violations(seed), 0u);
    const auto& end = m.power_trace(seed).back();
    EXPECT_FALSE(end.latch1);
    EXPECT_FALSE(end.latch2);
  }
  // The final ping is acked by both seeds once the RBC is back.
  const auto cmds = m.backend().commands();
  ASSERT_GE(cmds.size(), 3u);
  EXPECT_EQ(cmds.back().state, ground::AckState::Acked);
}

TEST(Mission, WindTunnelPowerReports) {
  Mission nominal(wind_tunnel_scenario(false), with_flash());
  nominal.run();
  const auto ok = analysis::power_report(nominal.flash(1));
  EXPECT_LT(ok.equality, 0.05);
  EXPECT_GT(ok.pulse_samples, 0u);
  EXPECT_FALSE(ok.undervoltage);
  EXPECT_TRUE(ok.pass);

  Mission imbalanced(wind_tunnel_scenario(true), with_flash());
  imbalanced.run();
  const auto bad = analysis::power_report(imbalanced.flash(1));
  EXPECT_TRUE(bad.imbalance);
  EXPECT_FALSE(bad.pass);
  EXPECT_GT(bad.mean_i_bat1, bad.mean_i_bat2);
}

TEST(Mission, WindTunnelTachometer) {
  Mission m(wind_tunnel_scenario(false), with_flash());
  m.run();
  const auto rep = analysis::validate_tachometer(analysis::tach_log_from_records(m.flash(1)));
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.analysed, 0u);

  auto sc = wind_tunnel_scenario(false);
  sc.sensors.harmonics[2].accel_g = 0.0;
  sc.sensors.harmonics[2].gyro_dps = 0.0;
  Mission control(sc, with_flash());
  control.run();
  EXPECT_FALSE(analysis::validate_tachometer(analysis::tach_log_from_records(control.flash(1))).pass);
}

TEST(Scenario, ShippedFilesLoad) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(SEEDSIM_SCENARIO_DIR)) {
    if (e.path().extension() != ".json" || e.path().stem() == "recovery") continue;
    EXPECT_NO_THROW(Scenario::load(e.path()).validate()) << e.path();
    ++n;
  }
  EXPECT_GE(n, 6u);
  const auto sc = Scenario::load(fs::path(SEEDSIM_SCENARIO_DIR) / "wind_tunnel_imbalanced.json");
  EXPECT_DOUBLE_EQ(sc.power.battery2.internal_resistance_ohm, 3.0 * sc.power.battery1.internal_resistance_ohm);
}

TEST(Scenario, InvalidInputsRejected) {
  EXPECT_ERRC(Scenario::from_json(json{{"duration_s", -1}}).validate(), Errc::ScenarioError);
  EXPECT_ERRC(Scenario::from_json(json{{"profile", {{"kind", "orbital"}}}}), Errc::ScenarioError);
  EXPECT_ERRC(Scenario::from_json(json{{"script", {{{"at", 1}, {"action", "self_destruct"}}}}}).validate(),
              Errc::ScenarioError);
  EXPECT_ERRC(Scenario::from_json(json{{"epoch", "yesterday"}}), Errc::ScenarioError);
  EXPECT_ERRC(Scenario::load("/nonexistent/scenario.json"), Errc::ScenarioError);
  auto sc = nominal_scenario();
  sc.status_hz = 7.0;
  EXPECT_ERRC(sc.validate(), Errc::ScenarioError);
  EXPECT_DOUBLE_EQ(parse_iso8601("2023-03-01T10:00:00Z"), 1677664800.0);
}
