#include "seedsim/mission/mission.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "seedsim/error.hpp"
#include "seedsim/flight/sensors.hpp"
#include "seedsim/ground/sbd_tcp.hpp"
#include "seedsim/middleware/middleware.hpp"
#include "seedsim/protocol/beacon.hpp"
#include "seedsim/protocol/frame.hpp"
#include "seedsim/protocol/sbd.hpp"
#include "seedsim/transport/iridium.hpp"
#include "seedsim/transport/lora.hpp"
#include "seedsim/transport/uart.hpp"

namespace seedsim::mission {

using flight::MissionPhase;
using kernel::NodeId;
using kernel::SimTime;
using kernel::Unit;
using nlohmann::json;
using protocol::Bytes;
using protocol::ByteView;

namespace {

constexpr std::uint16_t kTopicSeedStatus = 10;
constexpr std::uint16_t kTopicSensorSummary = 20;
constexpr std::uint16_t kTopicPowerStatus = 21;
constexpr std::uint16_t kTopicTelecommand = 30;
constexpr std::uint16_t kTopicCopCommand = 31;
constexpr std::uint16_t kTopicCommandAck = 32;
constexpr std::uint16_t kTopicSeedAck = 33;

constexpr std::uint16_t kMsgSeedStatus = 257;
constexpr std::uint16_t kMsgRbcStatus = 258;
constexpr std::uint16_t kMsgTelecommand = 513;
constexpr std::uint16_t kMsgCommandAck = 515;

// Separation bridge: only statuses old enough to have crossed CAN and the RXSM downlink.
constexpr double kBridgeMargin_s = 0.05;
constexpr double kRxsmRestoreDelay_s = 0.5;
constexpr double kConfirmDelay_s = 0.001;
constexpr double kSbdRetry_s = 1.0;

std::uint16_t clamp_u16(double v) { return std::uint16_t(std::clamp(std::lround(v), 0L, 65535L)); }
std::int16_t clamp_i16(double v) { return std::int16_t(std::clamp(std::lround(v), -32768L, 32767L)); }
std::int32_t clamp_i32(double v) {
  return std::int32_t(std::clamp<long long>(std::llround(v), INT32_MIN, INT32_MAX));
}

std::uint8_t conducting_bits(const power::SourceSet& s) { return std::uint8_t(s.bits()); }

}  // namespace

struct Seed {
  int index = 0;
  NodeId sbc;
  NodeId cop;
  flight::FlightProfile profile;
  flight::TrajectoryState traj;
  flight::SensorSuite sensors;
  power::PowerSystem power;
  power::LoadProfile load;
  flight::FlashLogWriter flash;
  std::optional<power::RadioSilenceProcedure> silence;
  std::optional<power::StateTrace> silence_done;
  bool powered = false;
  bool test_mode = false;
  bool can_lost = false;
  std::uint64_t ticks = 0;
  std::uint32_t flash_seq = 0;
  std::uint16_t status_counter = 0;
  std::uint16_t beacon_counter = 0;
  flight::SensorSample last_sample;
  std::uint16_t v_bat1_mv = 0;  // as received by the SBC from its COP
  std::uint16_t v_bat2_mv = 0;
  std::vector<StatusSample> statuses;
  std::optional<StatusSample> bridge;
  std::optional<Bytes> pending_sbd;
  double next_sbd_s = 0.0;
  std::vector<power::PowerBusState> trace;
  std::uint64_t violations = 0;

  Seed(int i, const Scenario& sc, kernel::RngStream rng)
      : index(i),
        sbc(NodeId::sbc(kernel::seed_unit(i))),
        cop(NodeId::cop(kernel::seed_unit(i))),
        profile(sc.profile),
        traj(flight::initial_state(sc.profile)),
        sensors(std::move(rng), sc.sensors, sc.origin),
        power(sc.power),
        load(sc.load_profile()) {}

  double servo(double t) const { return load.servo_current(t); }
};

struct Mission::Impl {
  Scenario sc;
  MissionOptions opt;
  kernel::Simulator sim;
  std::unique_ptr<transport::CanBus> can;
  std::unique_ptr<transport::UartLink> uart[2];
  std::unique_ptr<transport::UartLink> rxsm;
  std::unique_ptr<transport::LoRaLink> lora;
  std::unique_ptr<transport::Umbilical> umb;
  std::unique_ptr<middleware::Middleware> mw;
  std::unique_ptr<ground::Backend> backend;
  std::unique_ptr<ground::DirectSbdEndpoint> sbd_endpoint;
  std::unique_ptr<transport::IridiumService> iridium;
  const protocol::CodecSet* schema = nullptr;
  std::array<std::unique_ptr<Seed>, 2> seeds;

  protocol::FrameVerifier uplink_verifier{true};
  bool rbc_on = true;
  double rbc_boot_s = 0.0;
  std::uint8_t rbc_frame_seq = 0;
  std::uint16_t rbc_counter = 0;
  std::optional<double> last_rssi;
  std::uint64_t beacons = 0;
  std::vector<CanProbe> probes;
  std::vector<ActionLog> actions;
  SimTime tick_period;
  int status_every = 1, summary_every = 1, power_every = 1;
  std::ofstream trace_csv;

  Impl(Scenario s, MissionOptions o) : sc(std::move(s)), opt(std::move(o)), sim(sc.seed) {
    sc.validate();
    build();
  }

  double now_s() const { return sim.now().seconds(); }

  void build() {
    auto& trace = sim.trace();
    trace.set_keep_entries(opt.keep_trace_entries);
    if (opt.out_dir) {
      std::filesystem::create_directories(*opt.out_dir);
      trace_csv.open(*opt.out_dir / "trace.csv");
      trace_csv << "time_us,sequence,target,kind,detail\n";
      trace.set_stream(&trace_csv);
    }
    sim.nodes() = kernel::NodeRegistry::standard();
    sim.nodes().validate_topology();

    tick_period = SimTime::from_us(std::llround(1e6 / sc.tick_hz));
    status_every = int(std::lround(sc.tick_hz / sc.status_hz));
    summary_every = int(std::lround(sc.tick_hz / sc.summary_hz));
    power_every = int(std::lround(sc.tick_hz / sc.power_status_hz));

    for (int i = 0; i < 2; ++i) {
      seeds[i] = std::make_unique<Seed>(i, sc, sim.rng(fmt::format("sensors.seed{}", i + 1)));
      auto& sd = *seeds[i];
      if (opt.out_dir) {
        const auto p = *opt.out_dir / fmt::format("seed{}.flash", i + 1);
        sd.flash = flight::FlashLogWriter(p, flight::mirror_path(p));
      }
      sd.flash.set_keep_in_memory(opt.keep_flash);
      sd.power.set_rxsm_voltage(sc.rxsm_connected ? sc.power.rxsm_voltage : 0.0);
    }

    const NodeId rbc = NodeId::rbc();
    const NodeId sbc1 = seeds[0]->sbc, sbc2 = seeds[1]->sbc;
    can = std::make_unique<transport::CanBus>(
        sim, sim.register_link("can"),
        std::vector<transport::CanMember>{{rbc, 0x10}, {sbc1, 0x20}, {sbc2, 0x21}},
        transport::CanParams{sc.can_bitrate});
    for (int i = 0; i < 2; ++i) {
      uart[i] = std::make_unique<transport::UartLink>(sim, sim.register_link(fmt::format("uart{}", i + 1)),
                                                      seeds[i]->sbc, seeds[i]->cop, sc.uart);
    }
    rxsm = std::make_unique<transport::UartLink>(sim, sim.register_link("rxsm"), NodeId::ground(), rbc,
                                                 transport::UartParams{sc.rxsm_bitrate, 0.0, 10});
    rxsm->set_receiver([this](NodeId, NodeId to, ByteView bytes) {
      if (to == NodeId::ground()) {
        backend->ingest_frame(bytes, ground::Channel::Rxsm);
      } else {
        rbc_uplink(bytes);
      }
    });
    umb = std::make_unique<transport::Umbilical>(sim, *can, transport::UmbilicalParams{sc.power.rxsm_voltage});
    umb->on_change([this] { on_umbilical(); });

    mw = std::make_unique<middleware::Middleware>(sim);
    mw->register_topics(sc.topics.is_null() || sc.topics.empty() ? default_topic_table() : sc.topics);
    mw->attach(*can);
    mw->attach(*uart[0]);
    mw->attach(*uart[1]);
    mw->validate_forwarding();

    ground::BackendConfig cfg;
    if (opt.out_dir) cfg.store_path = *opt.out_dir / "records.jsonl";
    cfg.command_timeout_s = sc.command_timeout_s;
    cfg.uplink_key = protocol::from_hex(sc.uplink_key_hex);
    cfg.clock = [this] { return sc.epoch_unix_s + now_s(); };
    cfg.fix_period_s = 1.0 / sc.status_hz;
    cfg.predictor.ground_altitude_m = sc.origin.alt_m;
    backend = std::make_unique<ground::Backend>(std::move(cfg));
    schema = &backend->schema();
    backend->set_uplink([this](Bytes frame) { rxsm->send(NodeId::ground(), std::move(frame)); });
    uplink_verifier.set_key(kernel::kAddressGround, protocol::from_hex(sc.uplink_key_hex));

    sbd_endpoint = std::make_unique<ground::DirectSbdEndpoint>(*backend);
    iridium = std::make_unique<transport::IridiumService>(sim, sc.iridium, *sbd_endpoint);

    if (sc.lora_enabled) {
      transport::validate_lora_duty(sc.lora, protocol::kBeaconSize);
      lora = std::make_unique<transport::LoRaLink>(
          sim, sim.register_link("lora"), std::vector<NodeId>{sbc1, sbc2, NodeId::recovery_device()}, sc.lora,
          [this](NodeId n) {
            if (n == NodeId::recovery_device()) return sc.recovery_position;
            return seeds[kernel::seed_index(n.unit)]->traj.position;
          });
      lora->set_rssi_observer([this](NodeId, NodeId to, std::optional<double> rssi) {
        if (to == NodeId::recovery_device()) last_rssi = rssi;
      });
      lora->set_receiver([this](NodeId, NodeId to, ByteView bytes) {
        if (to != NodeId::recovery_device()) return;
        ++beacons;
        backend->ingest_beacon(bytes, last_rssi);
      });
    }

    subscribe_all();

    for (auto& sd : seeds) {
      auto bus = sd->power.evaluate({sc.baseline_w, sd->servo(0.0)}, 0.0);
      set_powered(*sd, bus.powered);
    }
    if (!sc.rxsm_connected) {
      sim.schedule(SimTime::zero(), NodeId::rbc(), "umbilical.open", [this] { umb->set_supply(false); });
    }
    if (sc.ejection && sc.profile.kind == flight::ProfileKind::Nominal) {
      bool scripted = false;
      for (const auto& a : sc.script) scripted |= a.kind == "sever";
      if (!scripted) umb->schedule_sever(SimTime::from_seconds(sc.profile.apex_time_s()));
    }
    for (const auto& a : sc.script) schedule_action(a);
    for (int i = 0; i < 2; ++i) schedule_tick(i, SimTime::zero());
    sim.schedule(SimTime::zero(), NodeId::rbc(), "rbc.status", [this] { rbc_status(); });
    sim.schedule(SimTime::from_seconds(1.0), NodeId::ground(), "ground.poll", [this] { ground_poll(); });
  }

  // ---- nodes ----------------------------------------------------------------------------

  void subscribe_all() {
    const NodeId rbc = NodeId::rbc();
    mw->subscribe(rbc, kTopicSeedStatus, [this](const middleware::PubSubMessage& m) {
      downlink(m.source.address(), kMsgSeedStatus, m.payload);
    });
    mw->subscribe(rbc, kTopicSeedAck, [this](const middleware::PubSubMessage& m) {
      downlink(m.source.address(), kMsgCommandAck, m.payload);
    });
    for (auto& ptr : seeds) {
      Seed* sd = ptr.get();
      mw->subscribe(sd->sbc, kTopicTelecommand, [this, sd](const middleware::PubSubMessage& m) {
        const auto v = schema->by_name("telecommand").decode(m.payload);
        const auto target = v.at("target").get<std::uint8_t>();
        if (target != sd->sbc.address() && target != kernel::kAddressBroadcast) return;
        const auto payload = schema->by_name("cop_command").encode(
            {{"command_id", v.at("command_id")}, {"command", v.at("command")}});
        mw->publish(sd->sbc, kTopicCopCommand, payload);
      });
      mw->subscribe(sd->sbc, kTopicCommandAck, [this, sd](const middleware::PubSubMessage& m) {
        const auto report = mw->publish(sd->sbc, kTopicSeedAck, m.payload);
        for (const auto& tx : report.transmissions) {
          if (tx.status != transport::TxStatus::Queued) sim.note(fmt::format("ack {}", to_string(tx.status)));
        }
      });
      mw->subscribe(sd->sbc, kTopicPowerStatus, [this, sd](const middleware::PubSubMessage& m) {
        const auto v = schema->by_name("power_status").decode(m.payload);
        sd->v_bat1_mv = v.at("v_bat1").get<std::uint16_t>();
        sd->v_bat2_mv = v.at("v_bat2").get<std::uint16_t>();
      });
      mw->subscribe(sd->sbc, kTopicSensorSummary, [](const middleware::PubSubMessage&) {});
      mw->subscribe(sd->cop, kTopicCopCommand, [this, sd](const middleware::PubSubMessage& m) {
        const auto v = schema->by_name("cop_command").decode(m.payload);
        cop_command(*sd, v.at("command_id").get<std::uint16_t>(), v.at("command").get<std::uint8_t>());
      });
    }
  }

  void downlink(std::uint8_t src, std::uint16_t msg_id, ByteView payload) {
    if (!rbc_on) return;
    protocol::FrameHeader h{rbc_frame_seq++, src, kernel::kAddressGround, msg_id};
    rxsm->send(NodeId::rbc(), protocol::encode_frame(h, payload));
  }

  void rbc_status() {
    if (rbc_on) {
      const auto payload = schema->by_name("rbc_status").encode({
          {"counter", ++rbc_counter},
          {"uptime", std::uint32_t(std::llround((now_s() - rbc_boot_s) * 1000.0))},
          {"seeds_attached", can->intact() ? 2 : 0},
          {"v_rxsm", clamp_u16(umb->v_rxsm() * 1000.0)},
          {"can_errors", clamp_u16(double(can->bus_errors()))},
      });
      downlink(kernel::kAddressRbc, kMsgRbcStatus, payload);
    }
    sim.schedule_in(SimTime::from_us(std::llround(1e6 / sc.status_hz)), NodeId::rbc(), "rbc.status",
                    [this] { rbc_status(); });
  }

  void ground_poll() {
    backend->poll_timeouts();
    sim.schedule_in(SimTime::from_seconds(1.0), NodeId::ground(), "ground.poll", [this] { ground_poll(); });
  }

  void rbc_uplink(ByteView bytes) {
    if (!rbc_on) {
      sim.note("rbc off");
      return;
    }
    protocol::Frame f;
    try {
      f = uplink_verifier.decode(bytes);
    } catch (const Error& e) {
      sim.note(fmt::format("uplink rejected {}", to_string(e.code())));
      return;
    }
    if (f.header.msg_id != kMsgTelecommand) return;
    const auto v = schema->by_name("telecommand").decode(f.payload);
    const auto target = v.at("target").get<std::uint8_t>();
    if (target == kernel::kAddressRbc) {
      const auto cmd = v.at("command").get<std::uint8_t>();
      const auto ack = schema->by_name("command_ack").encode(
          {{"command_id", v.at("command_id")},
           {"command", cmd},
           {"origin", kernel::kAddressRbc},
           {"status", cmd == std::uint8_t(ground::CommandType::Ping) ? ground::kAckOk : ground::kAckRejected}});
      downlink(kernel::kAddressRbc, kMsgCommandAck, ack);
      return;
    }
    const auto report = mw->publish(NodeId::rbc(), kTopicTelecommand, f.payload);
    for (const auto& tx : report.transmissions) sim.note(fmt::format("can {}", to_string(tx.status)));
  }

  void cop_ack(Seed& sd, std::uint16_t id, std::uint8_t cmd, bool ok) {
    const auto ack = schema->by_name("command_ack").encode(
        {{"command_id", id}, {"command", cmd}, {"origin", sd.sbc.address()}, {"status", ok ? ground::kAckOk : ground::kAckRejected}});
    mw->publish(sd.cop, kTopicCommandAck, ack);
  }

  void cop_command(Seed& sd, std::uint16_t id, std::uint8_t cmd) {
    const double t = now_s();
    switch (ground::CommandType(cmd)) {
      case ground::CommandType::Ping:
        cop_ack(sd, id, cmd, true);
        break;
      case ground::CommandType::RequestRadioSilence: {
        bool ok = false;
        try {
          sd.silence.emplace(sd.power, power::LoadDemand{sc.baseline_w, sd.servo(t)});
          ok = sd.silence->begin(t) && sd.silence->set_latches(t, true);
        } catch (const Error& e) {
          sim.note(fmt::format("radio silence {}", e.what()));
        }
        if (!ok) {
          cop_ack(sd, id, cmd, false);
          break;
        }
        sd.traj.phase = MissionPhase::RadioSilence;
        sim.note(fmt::format("seed{} latches set", sd.index + 1));
        Seed* p = &sd;
        sim.schedule_in(SimTime::from_seconds(kConfirmDelay_s), sd.cop, "cop.confirm", [this, p, id, cmd] {
          bool confirmed = false;
          try {
            confirmed = p->silence && p->silence->confirm_rxsm_only(now_s());
          } catch (const Error& e) {
            sim.note(e.what());
          }
          cop_ack(*p, id, cmd, confirmed);
        });
        break;
      }
      case ground::CommandType::ReEnableBatteries: {
        auto& l = sd.power.latch();
        l.set_dis_bat1(false);
        l.set_dis_bat2(false);
        l.pulse_clock();
        if (sd.silence) finish_silence(sd);
        if (sd.traj.phase == MissionPhase::RadioSilence) sd.traj.phase = MissionPhase::PreLaunch;
        cop_ack(sd, id, cmd, !l.q1() && !l.q2());
        break;
      }
      case ground::CommandType::SetTestMode:
        sd.test_mode = true;
        cop_ack(sd, id, cmd, true);
        break;
      default:
        cop_ack(sd, id, cmd, false);
    }
  }

  void finish_silence(Seed& sd) {
    sd.silence_done = sd.silence->trace();
    sd.silence.reset();
  }

  void cop_boot(Seed& sd) {
    sim.note(fmt::format("seed{} boot", sd.index + 1));
    if (sd.silence && sd.silence->next() == power::SilenceStep::Rearmed) {
      const bool ok = sd.silence->rearm(now_s(), sd.power.rxsm_voltage());
      sim.note(fmt::format("seed{} rearm {}", sd.index + 1, ok ? "ok" : "failed"));
      if (ok) {
        finish_silence(sd);
        sd.traj.phase = MissionPhase::PreLaunch;
      }
    }
  }

  void set_powered(Seed& sd, bool powered) {
    if (powered == sd.powered) return;
    sd.powered = powered;
    mw->set_node_active(sd.sbc, powered);
    mw->set_node_active(sd.cop, powered);
    if (sim.now() > SimTime::zero() || powered) sim.note(fmt::format("seed{} {}", sd.index + 1, powered ? "powered" : "unpowered"));
    if (powered) cop_boot(sd);
  }

  void on_umbilical() {
    const double t = now_s();
    for (auto& ptr : seeds) {
      auto& sd = *ptr;
      sd.power.set_rxsm_voltage(umb->v_rxsm());
      try {
        if (sd.silence && umb->v_rxsm() == 0.0 && sd.silence->next() == power::SilenceStep::RxsmCut) {
          sd.silence->cut_rxsm(t);
        }
      } catch (const Error& e) {
        sim.note(e.what());
      }
      const auto bus = sd.power.evaluate({sc.baseline_w, sd.servo(t)}, t);
      record_power(sd, bus, true);
      set_powered(sd, bus.powered);
      if (umb->severed() && !sd.bridge) bridge(sd);
    }
  }

  // Last status old enough to be on the ground via RXSM, resent over Iridium after separation.
  void bridge(Seed& sd) {
    const double cutoff = now_s() - kBridgeMargin_s;
    for (auto it = sd.statuses.rbegin(); it != sd.statuses.rend(); ++it) {
      if (it->time_s <= cutoff) {
        sd.bridge = *it;
        sd.pending_sbd = it->payload;
        sim.note(fmt::format("seed{} bridge counter {}", sd.index + 1, it->counter));
        send_pending_sbd(sd);
        return;
      }
    }
  }

  void send_pending_sbd(Seed& sd) {
    if (!sd.pending_sbd || !sc.iridium_enabled || !sd.powered) return;
    const auto outcome = iridium->send_sbd(sd.sbc, *sd.pending_sbd);
    if (outcome == transport::DeliveryOutcome::Scheduled) {
      sd.pending_sbd.reset();
    } else {
      Seed* p = &sd;
      sim.schedule_in(SimTime::from_seconds(kSbdRetry_s), sd.sbc, "sbd.retry", [this, p] { send_pending_sbd(*p); });
    }
  }

  // ---- seed tick ------------------------------------------------------------------------

  void schedule_tick(int i, SimTime at) {
    if (at.seconds() > sc.duration_s + 1e-9) return;
    sim.schedule(at, seeds[i]->sbc, "tick", [this, i] {
      tick(*seeds[i]);
      schedule_tick(i, sim.now() + tick_period);
    });
  }

  void record_power(Seed& sd, const power::PowerBusState& bus, bool force) {
    const bool change = sd.trace.empty() || sd.trace.back().conducting != bus.conducting ||
                        sd.trace.back().latch1 != bus.latch1 || sd.trace.back().latch2 != bus.latch2 ||
                        sd.trace.back().powered != bus.powered;
    if (force || change || sd.ticks % std::uint64_t(std::max(1, opt.power_trace_every)) == 0) {
      sd.trace.push_back(bus);
    }
  }

  void tick(Seed& sd) {
    const double t = now_s();
    const double dt = tick_period.seconds();
    const auto k = sd.ticks;
    if (k > 0) {
      const auto before = sd.traj.phase;
      sd.traj = flight::propagate(sd.traj, dt, sd.profile);
      if (sd.traj.phase != before) sim.note(fmt::format("phase {}", flight::to_string(sd.traj.phase)));
    }
    const double servo = sd.servo(t);
    const power::LoadDemand demand{sc.baseline_w, servo};
    const auto bus = k > 0 ? sd.power.step(demand, t, dt) : sd.power.evaluate(demand, t);
    if ((bus.latch1 && bus.i_bat1 != 0.0) || (bus.latch2 && bus.i_bat2 != 0.0)) ++sd.violations;
    record_power(sd, bus, false);
    set_powered(sd, bus.powered);
    ++sd.ticks;
    if (!sd.powered) return;

    const auto sample = sd.sensors.sample(sd.traj);
    sd.last_sample = sample;
    sd.flash.append(flight::make_flash_record(std::uint64_t(sim.now().us()), sd.flash_seq++, sd.traj.phase, sample,
                                              bus, sd.profile.rotor_setpoint(t), servo));

    if (k % std::uint64_t(power_every) == 0) publish_power(sd, bus);
    if (k % std::uint64_t(summary_every) == 0) publish_summary(sd, sample);
    if (k % std::uint64_t(status_every) == 0) publish_status(sd, bus);

    const auto phase = sd.traj.phase;
    if (sc.iridium_enabled && flight::phase_rank(phase) >= flight::phase_rank(MissionPhase::Ascent) &&
        t + 1e-9 >= sd.next_sbd_s && !sd.statuses.empty()) {
      sd.next_sbd_s = t + sc.sbd_period_s;
      if (umb->severed() && !sd.pending_sbd) {
        sd.pending_sbd = sd.statuses.back().payload;
        send_pending_sbd(sd);
      }
    }
    if (lora && (phase == MissionPhase::Landed || sd.test_mode)) {
      const auto every = std::uint64_t(std::llround(sc.lora.beacon_interval_s * sc.tick_hz));
      if (k % every == 0) send_beacon(sd);
    }
  }

  void publish_power(Seed& sd, const power::PowerBusState& bus) {
    const auto payload = schema->by_name("power_status").encode({
        {"v_bus", clamp_u16(bus.bus_voltage * 1000.0)},
        {"v_bat1", clamp_u16(bus.v_bat1 * 1000.0)},
        {"v_bat2", clamp_u16(bus.v_bat2 * 1000.0)},
        {"v_rxsm", clamp_u16(bus.v_rxsm * 1000.0)},
        {"i_bat1", clamp_i16(bus.i_bat1 * 1000.0)},
        {"i_bat2", clamp_i16(bus.i_bat2 * 1000.0)},
        {"i_rxsm", clamp_i16(bus.i_rxsm * 1000.0)},
        {"conducting", conducting_bits(bus.conducting)},
        {"latches", std::uint8_t((bus.latch1 ? 1 : 0) | (bus.latch2 ? 2 : 0))},
    });
    mw->publish(sd.cop, kTopicPowerStatus, payload);
  }

  void publish_summary(Seed& sd, const flight::SensorSample& s) {
    const auto payload = schema->by_name("sensor_summary").encode({
        {"time", std::uint64_t(sim.now().us())},
        {"accel", {s.accel_precise.x, s.accel_precise.y, s.accel_precise.z}},
        {"accel_highload", {s.accel_highload.x, s.accel_highload.y, s.accel_highload.z}},
        {"baro_wide", s.baro_wide_mbar},
        {"tachometer", s.tachometer_hz},
    });
    mw->publish(sd.cop, kTopicSensorSummary, payload);
  }

  void publish_status(Seed& sd, const power::PowerBusState& bus) {
    protocol::SbdRecord r;
    r.seed_id = std::uint8_t(sd.index + 1);
    r.counter = ++sd.status_counter;
    const auto& fix = sd.last_sample.gps;
    if (fix.valid) {
      r.lat_e7 = clamp_i32(fix.position.lat_deg * 1e7);
      r.lon_e7 = clamp_i32(fix.position.lon_deg * 1e7);
      r.alt_mm = clamp_i32(fix.position.alt_m * 1000.0);
      r.vz_cms = clamp_i16(fix.vz_mps * 100.0);
      r.flags |= protocol::kSbdFlagGpsValid;
    }
    r.phase = std::uint8_t(sd.traj.phase);
    r.v_bat1_mv = sd.v_bat1_mv;
    r.v_bat2_mv = sd.v_bat2_mv;
    if (bus.latch1 || bus.latch2) r.flags |= protocol::kSbdFlagLatchesSet;
    if (sd.traj.rotor_rate_hz > sc.sensors.gps_max_rotor_hz) r.flags |= protocol::kSbdFlagHighSpin;
    if (sd.test_mode) r.flags |= protocol::kSbdFlagTestMode;
    const auto enc = protocol::encode_sbd(r);
    Bytes payload(enc.begin(), enc.end());
    sd.statuses.push_back({now_s(), r.counter, payload});
    // After the first bus error the SBC treats the rocket as gone and stops using CAN.
    if (sd.can_lost) return;
    const auto report = mw->publish(sd.sbc, kTopicSeedStatus, payload);
    for (const auto& tx : report.transmissions) {
      if (tx.status == transport::TxStatus::BusError) {
        sd.can_lost = true;
        sim.note(fmt::format("seed{} can lost", sd.index + 1));
      }
    }
  }

  void send_beacon(Seed& sd) {
    protocol::BeaconMessage b;
    b.seed_id = std::uint8_t(sd.index + 1);
    b.counter = ++sd.beacon_counter;
    const auto& fix = sd.last_sample.gps;
    if (fix.valid) {
      b.has_fix = true;
      b.lat_e7 = clamp_i32(fix.position.lat_deg * 1e7);
      b.lon_e7 = clamp_i32(fix.position.lon_deg * 1e7);
      b.alt_mm = clamp_i32(fix.position.alt_m * 1000.0);
    }
    const auto enc = protocol::encode_beacon(b);
    lora->send(sd.sbc, Bytes(enc.begin(), enc.end()));
  }

  // ---- script ---------------------------------------------------------------------------

  Seed& seed_arg(const json& args) {
    const int s = args.value("seed", 1);
    if (s != 1 && s != 2) throw Error(Errc::ScenarioError, fmt::format("seed {} out of range", s));
    return *seeds[s - 1];
  }

  void log(const std::string& kind, std::string outcome) {
    sim.note(outcome);
    actions.push_back({now_s(), kind, std::move(outcome)});
  }

  void schedule_action(const ScriptAction& a) {
    sim.schedule(SimTime::from_seconds(a.at_s), NodeId::ground(), "script." + a.kind, [this, a] { run_action(a); });
  }

  void run_action(const ScriptAction& a) {
    const auto& k = a.kind;
    const double t = now_s();
    if (k == "command") {
      const auto name = a.args.value("command", std::string("ping"));
      const auto cmd = ground::command_from_string(name);
      if (!cmd) throw Error(Errc::ScenarioError, fmt::format("unknown command '{}'", name));
      const auto target_name = a.args.value("target", std::string("broadcast"));
      std::uint8_t target = kernel::kAddressBroadcast;
      if (target_name == "rbc") target = kernel::kAddressRbc;
      else if (target_name == "sbc1" || target_name == "seed1") target = kernel::kAddressSbc1;
      else if (target_name == "sbc2" || target_name == "seed2") target = kernel::kAddressSbc2;
      try {
        const auto req = backend->dispatch_command(*cmd, target, "script");
        log(k, fmt::format("{} id {}", name, req.id));
      } catch (const Error& e) {
        log(k, fmt::format("{} {}", name, to_string(e.code())));
      }
    } else if (k == "rbc_cut_rxsm") {
      umb->set_supply(false);
      log(k, "rxsm off");
    } else if (k == "rbc_restore_rxsm") {
      umb->set_supply(true);
      log(k, "rxsm on");
    } else if (k == "rbc_power") {
      const bool on = a.args.value("on", true);
      if (on && !rbc_on) {
        rbc_on = true;
        rbc_boot_s = t;
        mw->set_node_active(NodeId::rbc(), true);
        sim.schedule_in(SimTime::from_seconds(kRxsmRestoreDelay_s), NodeId::rbc(), "rbc.rxsm_on", [this] {
          if (!umb->severed()) umb->set_supply(true);
        });
        log(k, "rbc on");
      } else if (!on && rbc_on) {
        rbc_on = false;
        mw->set_node_active(NodeId::rbc(), false);
        if (umb->supply_on()) umb->set_supply(false);
        for (auto& sd : seeds) {
          if (sd->silence && sd->silence->next() == power::SilenceStep::RbcOff) {
            try {
              sd->silence->cut_rbc(t);
            } catch (const Error& e) {
              sim.note(e.what());
            }
          }
        }
        log(k, "rbc off");
      }
    } else if (k == "rbc_can_probe") {
      const auto payload = schema->by_name("telecommand").encode(
          {{"command_id", 0}, {"command", 0}, {"target", kernel::kAddressBroadcast}, {"issued_at", 0}});
      const auto status = can->send(NodeId::rbc(), payload);
      probes.push_back({t, status});
      log(k, std::string(to_string(status)));
    } else if (k == "latch") {
      auto& sd = seed_arg(a.args);
      auto& l = sd.power.latch();
      l.set_dis_bat1(a.args.value("bat1", false));
      l.set_dis_bat2(a.args.value("bat2", false));
      l.pulse_clock();
      log(k, fmt::format("seed{} q1={} q2={}", sd.index + 1, l.q1(), l.q2()));
    } else if (k == "sever") {
      umb->sever();
      log(k, "severed");
    } else if (k == "test_mode") {
      auto& sd = seed_arg(a.args);
      sd.test_mode = a.args.value("on", true);
      log(k, fmt::format("seed{} test mode {}", sd.index + 1, sd.test_mode));
    }
  }
};

Mission::Mission(Scenario scenario, MissionOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {}

Mission::~Mission() = default;

std::string Mission::run_until(double t_s) {
  const double end = std::min(t_s, impl_->sc.duration_s);
  auto& trace = impl_->sim.run_until(SimTime::from_seconds(end));
  for (auto& sd : impl_->seeds) sd->flash.flush();
  if (impl_->opt.out_dir) {
    for (int i = 0; i < 2; ++i) {
      std::ofstream out(*impl_->opt.out_dir / fmt::format("seed{}_power.csv", i + 1));
      out << power_trace_csv(impl_->seeds[i]->trace);
    }
    std::ofstream(*impl_->opt.out_dir / "summary.json") << summary().dump(2) << "\n";
    impl_->trace_csv.flush();
  }
  return trace.digest();
}

std::string Mission::run() { return run_until(impl_->sc.duration_s); }

const Scenario& Mission::scenario() const { return impl_->sc; }
kernel::Simulator& Mission::sim() { return impl_->sim; }
const kernel::Simulator& Mission::sim() const { return impl_->sim; }
ground::Backend& Mission::backend() { return *impl_->backend; }
const transport::CanBus& Mission::can() const { return *impl_->can; }
const transport::Umbilical& Mission::umbilical() const { return *impl_->umb; }

namespace {
void check_seed(int seed) {
  if (seed != 1 && seed != 2) throw Error(Errc::ScenarioError, fmt::format("seed {} out of range", seed));
}
}  // namespace

const power::PowerSystem& Mission::power(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->power;
}
const std::vector<power::PowerBusState>& Mission::power_trace(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->trace;
}
const std::vector<flight::FlashRecord>& Mission::flash(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->flash.records();
}
const flight::TrajectoryState& Mission::trajectory(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->traj;
}
flight::MissionPhase Mission::phase(int seed) const { return trajectory(seed).phase; }
const power::StateTrace* Mission::silence_trace(int seed) const {
  check_seed(seed);
  const auto& sd = *impl_->seeds[seed - 1];
  if (sd.silence) return &sd.silence->trace();
  if (sd.silence_done) return &*sd.silence_done;
  return nullptr;
}
std::uint64_t Mission::silence_violations(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->violations;
}
const std::vector<StatusSample>& Mission::statuses(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->statuses;
}
std::optional<StatusSample> Mission::bridge_status(int seed) const {
  check_seed(seed);
  return impl_->seeds[seed - 1]->bridge;
}
std::uint64_t Mission::beacons_heard() const { return impl_->beacons; }
const std::vector<CanProbe>& Mission::can_probes() const { return impl_->probes; }
const std::vector<ActionLog>& Mission::actions() const { return impl_->actions; }

json Mission::summary() const {
  const auto& m = *impl_;
  json seeds = json::array();
  for (const auto& sd : m.seeds) {
    json s{{"seed", sd->index + 1},
           {"phase", flight::to_string(sd->traj.phase)},
           {"position_m", {sd->traj.position.x, sd->traj.position.y, sd->traj.position.z}},
           {"soc1", sd->power.battery(power::Source::Bat1).soc()},
           {"soc2", sd->power.battery(power::Source::Bat2).soc()},
           {"flash_records", sd->flash.count()},
           {"statuses", sd->statuses.size()},
           {"silence_violations", sd->violations}};
    if (const auto* tr = silence_trace(sd->index + 1)) {
      json steps = json::array();
      for (const auto& st : tr->states) steps.push_back(power::to_string(st.step));
      s["radio_silence"] = steps;
    }
    seeds.push_back(std::move(s));
  }
  json actions = json::array();
  for (const auto& a : m.actions) actions.push_back({{"t", a.time_s}, {"kind", a.kind}, {"outcome", a.outcome}});
  json commands = json::array();
  for (const auto& c : m.backend->commands()) commands.push_back(c.to_json());
  json out{{"scenario", m.sc.name},
           {"seed", m.sc.seed},
           {"sim_time_s", m.sim.now().seconds()},
           {"events", m.sim.trace().size()},
           {"trace_digest", m.sim.trace().digest()},
           {"seeds", seeds},
           {"actions", actions},
           {"commands", commands},
           {"records", m.backend->store().last_seq()},
           {"beacons_heard", m.beacons},
           {"can_bus_errors", m.can->bus_errors()}};
  if (const auto st = m.umb->sever_time()) out["sever_time_s"] = st->seconds();
  return out;
}

std::string power_trace_csv(const std::vector<power::PowerBusState>& trace) {
  std::string out = power::power_csv_header();
  out += "\n";
  for (const auto& s : trace) {
    out += power::power_csv_row(s);
    out += "\n";
  }
  return out;
}

}  // namespace seedsim::mission
