#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seedsim/power/power_system.hpp"

namespace seedsim::power {

enum class SilenceStep : int {
  AllSupplying = 1,
  LatchesSet = 2,
  RxsmOnly = 3,
  RxsmCut = 4,
  RbcOff = 5,
  Rearmed = 6,
};
const char* to_string(SilenceStep s);

struct SilenceState {
  SilenceStep step = SilenceStep::AllSupplying;
  double time_s = 0.0;
  PowerBusState bus;
  bool rbc_powered = true;
};

struct StateTrace {
  std::vector<SilenceState> states;
  std::optional<SilenceStep> stalled_at;

  bool complete() const;
};

/// Drives a PowerSystem through the radio-silence procedure, one action per step.
/// Each action returns false (and records the stall) if the expected state was not reached.
class RadioSilenceProcedure {
 public:
  RadioSilenceProcedure(PowerSystem& power, LoadDemand load);

  /// Step 1: seed running with all three inputs enabled and RXSM present.
  bool begin(double t_s);
  /// Step 2: COP raises DIS_BAT1/DIS_BAT2 and, if clock_edge, pulses FF_CLK.
  bool set_latches(double t_s, bool clock_edge = true);
  /// Step 3: controllers have responded; only RXSM conducts.
  bool confirm_rxsm_only(double t_s);
  /// Step 4: RXSM removed; seed unpowered with latches holding.
  bool cut_rxsm(double t_s);
  /// Step 5: RBC loses power.
  bool cut_rbc(double t_s);
  /// Step 6: external power back, RBC boots, COP clears both latches.
  bool rearm(double t_s, double v_rxsm);

  const StateTrace& trace() const { return trace_; }
  SilenceStep next() const { return next_; }
  bool stalled() const { return trace_.stalled_at.has_value(); }

 private:
  bool record(SilenceStep step, double t_s, bool ok);
  void check_battery_current(const PowerBusState& s) const;

  PowerSystem& power_;
  LoadDemand load_;
  bool rbc_powered_ = true;
  SilenceStep next_ = SilenceStep::AllSupplying;
  StateTrace trace_;
};

struct SilenceOptions {
  bool clock_edge = true;
  double v_rxsm = 28.0;
  double step_interval_s = 1.0;
  LoadDemand load{3.0, 0.0};
};

/// Runs the whole procedure on a copy of the given system and returns the trace.
StateTrace radio_silence_sequence(const PowerSystem& initial, const SilenceOptions& options = {});

}  // namespace seedsim::power
