#include "seedsim/power/radio_silence.hpp"

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::power {

const char* to_string(SilenceStep s) {
  switch (s) {
    case SilenceStep::AllSupplying: return "all-supplying";
    case SilenceStep::LatchesSet: return "latches-set";
    case SilenceStep::RxsmOnly: return "rxsm-only";
    case SilenceStep::RxsmCut: return "rxsm-cut";
    case SilenceStep::RbcOff: return "rbc-off";
    case SilenceStep::Rearmed: return "rearmed";
  }
  return "?";
}

bool StateTrace::complete() const {
  if (stalled_at || states.size() != 6) return false;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (static_cast<int>(states[i].step) != static_cast<int>(i) + 1) return false;
  }
  return true;
}

RadioSilenceProcedure::RadioSilenceProcedure(PowerSystem& power, LoadDemand load) : power_(power), load_(load) {}

bool RadioSilenceProcedure::record(SilenceStep step, double t_s, bool ok) {
  if (stalled()) return false;
  if (step != next_) {
    throw Error(Errc::SequenceViolation, fmt::format("step {} out of order", to_string(step)));
  }
  if (!ok) {
    // A stall is reported against the last step actually reached.
    trace_.stalled_at = trace_.states.empty() ? SilenceStep::AllSupplying : trace_.states.back().step;
    return false;
  }
  SilenceState s;
  s.step = step;
  s.time_s = t_s;
  s.bus = power_.evaluate(load_, t_s);
  s.rbc_powered = rbc_powered_;
  const int n = static_cast<int>(step);
  if (n >= 3 && n <= 5) check_battery_current(s.bus);
  trace_.states.push_back(s);
  if (n < 6) next_ = static_cast<SilenceStep>(n + 1);
  return true;
}

void RadioSilenceProcedure::check_battery_current(const PowerBusState& s) const {
  if (s.i_bat1 != 0.0 || s.i_bat2 != 0.0) {
    throw Error(Errc::SequenceViolation,
                fmt::format("battery current during radio silence: {} A / {} A", s.i_bat1, s.i_bat2));
  }
}

bool RadioSilenceProcedure::begin(double t_s) {
  const auto bus = power_.evaluate(load_, t_s);
  const bool ok = bus.powered && bus.enabled == SourceSet{Source::Bat1, Source::Bat2, Source::Rxsm} &&
                  bus.v_rxsm >= kMinInputVoltage;
  return record(SilenceStep::AllSupplying, t_s, ok);
}

bool RadioSilenceProcedure::set_latches(double t_s, bool clock_edge) {
  if (stalled()) return false;
  auto& latch = power_.latch();
  latch.set_dis_bat1(true);
  latch.set_dis_bat2(true);
  if (clock_edge) latch.pulse_clock();
  return record(SilenceStep::LatchesSet, t_s, latch.q1() && latch.q2());
}

bool RadioSilenceProcedure::confirm_rxsm_only(double t_s) {
  const auto bus = power_.evaluate(load_, t_s);
  return record(SilenceStep::RxsmOnly, t_s, bus.powered && bus.conducting == SourceSet{Source::Rxsm});
}

bool RadioSilenceProcedure::cut_rxsm(double t_s) {
  if (stalled()) return false;
  power_.set_rxsm_voltage(0.0);
  const auto bus = power_.evaluate(load_, t_s);
  return record(SilenceStep::RxsmCut, t_s, !bus.powered && power_.latch().q1() && power_.latch().q2());
}

bool RadioSilenceProcedure::cut_rbc(double t_s) {
  if (stalled()) return false;
  rbc_powered_ = false;
  const auto bus = power_.evaluate(load_, t_s);
  return record(SilenceStep::RbcOff, t_s, !bus.powered);
}

bool RadioSilenceProcedure::rearm(double t_s, double v_rxsm) {
  if (stalled()) return false;
  power_.set_rxsm_voltage(v_rxsm);
  rbc_powered_ = true;
  auto& latch = power_.latch();
  latch.set_dis_bat1(false);
  latch.set_dis_bat2(false);
  latch.pulse_clock();
  const auto bus = power_.evaluate(load_, t_s);
  const bool ok = bus.powered && !latch.q1() && !latch.q2() &&
                  bus.enabled == SourceSet{Source::Bat1, Source::Bat2, Source::Rxsm};
  return record(SilenceStep::Rearmed, t_s, ok);
}

StateTrace radio_silence_sequence(const PowerSystem& initial, const SilenceOptions& options) {
  PowerSystem power = initial;
  RadioSilenceProcedure proc(power, options.load);
  double t = 0.0;
  const double dt = options.step_interval_s;
  proc.begin(t) && proc.set_latches(t += dt, options.clock_edge) && proc.confirm_rxsm_only(t += dt) &&
      proc.cut_rxsm(t += dt) && proc.cut_rbc(t += dt) && proc.rearm(t += dt, options.v_rxsm);
  return proc.trace();
}

}  // namespace seedsim::power
