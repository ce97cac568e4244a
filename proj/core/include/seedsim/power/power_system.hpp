#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seedsim/power/battery.hpp"

namespace seedsim::power {

enum class Source : std::uint8_t { Bat1 = 0, Bat2 = 1, Rxsm = 2 };
const char* to_string(Source s);

class SourceSet {
 public:
  constexpr SourceSet() = default;
  constexpr SourceSet(std::initializer_list<Source> list) {
    for (Source s : list) insert(s);
  }
  static constexpr SourceSet from_bits(std::uint8_t bits) {
    SourceSet s;
    s.bits_ = bits & 0x07;
    return s;
  }

  constexpr bool has(Source s) const { return bits_ & bit(s); }
  constexpr void insert(Source s) { bits_ |= bit(s); }
  constexpr void erase(Source s) { bits_ &= static_cast<std::uint8_t>(~bit(s)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return (bits_ & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1); }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const SourceSet&) const = default;

  /// "bat1+rxsm", "none" for the empty set.
  std::string str() const;

 private:
  static constexpr std::uint8_t bit(Source s) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s)); }
  std::uint8_t bits_ = 0;
};

enum class DiodeMode { Schottky, IdealMosfet };

struct DiodeParams {
  double schottky_drop_v = 0.4;
  double r_ds_on_ohm = 0.005;  // per FET, two FETs back to back
};

/// Conduction loss of one OR-ing element carrying i_load.
double diode_loss(DiodeMode mode, double i_load, const DiodeParams& params = {});

/// Pair of D flip-flops gating the battery ideal-diode controllers.
class DisableLatch {
 public:
  void set_dis_bat1(bool level) { d1_ = level; }
  void set_dis_bat2(bool level) { d2_ = level; }
  /// Drives FF_CLK; Q follows D only on a low→high transition.
  void set_ff_clk(bool level);
  /// Convenience: one full low→high→low pulse.
  void pulse_clock();

  bool q1() const { return q1_; }
  bool q2() const { return q2_; }
  bool dis_bat1() const { return d1_; }
  bool dis_bat2() const { return d2_; }
  bool clock() const { return clk_; }

 private:
  bool d1_ = false, d2_ = false;
  bool clk_ = false;
  bool q1_ = false, q2_ = false;
};

constexpr double kMinInputVoltage = 6.0;
constexpr double kMaxInputVoltage = 40.0;
constexpr double kDefaultHysteresis = 0.020;

/// OR-ing rule over enabled inputs: the highest wins, others within the hysteresis band
/// conduct alongside.  Throws NoSource when nothing enabled is at or above min_input.
SourceSet select_sources(double v1, double v2, double vr, const DisableLatch& latches,
                         double hysteresis = kDefaultHysteresis, double min_input = kMinInputVoltage);

struct ServoPulse {
  double start_s = 0.0;
  double duration_s = 0.0;
  double current_a = 0.0;
};

struct LoadProfile {
  double baseline_w = 0.0;
  std::vector<ServoPulse> servo_pulses;

  /// Throws ScenarioError on negative values.
  void validate() const;
  double servo_current(double t_s) const;
  bool in_pulse(double t_s) const;
};

/// Instantaneous demand: constant-power electronics plus constant-current servos.
struct LoadDemand {
  double power_w = 0.0;
  double current_a = 0.0;
};

struct PowerBusState {
  double time_s = 0.0;
  double v_bat1 = 0.0;  // open-circuit
  double v_bat2 = 0.0;
  double v_rxsm = 0.0;
  double i_bat1 = 0.0;
  double i_bat2 = 0.0;
  double i_rxsm = 0.0;
  double bus_voltage = 0.0;
  double load_w = 0.0;         // delivered at the bus
  double dissipation_w = 0.0;  // series losses between each source and the bus
  SourceSet enabled;
  SourceSet conducting;
  bool latch1 = false;
  bool latch2 = false;
  bool powered = false;
  unsigned warnings = 0;

  double current(Source s) const;
  double source_voltage(Source s) const;
  double battery_current() const { return i_bat1 + i_bat2; }
};

struct PowerParams {
  BatteryParams battery1;
  BatteryParams battery2;
  double soc1 = 1.0;
  double soc2 = 1.0;
  DiodeParams diode;
  double hysteresis_v = kDefaultHysteresis;
  double min_input_v = kMinInputVoltage;
  double rxsm_harness_ohm = 0.08;
  double rxsm_voltage = 28.0;
};

/// Result of the resistive-divider bus solve for a given conducting set.
struct BusSolution {
  bool powered = false;
  double bus_voltage = 0.0;
  std::array<double, 3> currents{};
  SourceSet conducting;
};

/// Solves sum_k (E_k - V)/R_k = P/V + I for the bus voltage, dropping any source that
/// would take reverse current.  emf and resistance are indexed by Source.
BusSolution solve_bus(const std::array<double, 3>& emf, const std::array<double, 3>& resistance, SourceSet candidates,
                      LoadDemand load, double min_bus_v = kMinInputVoltage);

class PowerSystem {
 public:
  explicit PowerSystem(PowerParams params = {});

  BatteryString& battery(Source s);
  const BatteryString& battery(Source s) const;
  DisableLatch& latch() { return latch_; }
  const DisableLatch& latch() const { return latch_; }
  const PowerParams& params() const { return params_; }

  void set_rxsm_voltage(double v) { v_rxsm_ = v < 0.0 ? 0.0 : v; }
  double rxsm_voltage() const { return v_rxsm_; }

  double path_resistance(Source s) const;
  SourceSet enabled() const;

  /// Bus state for the given demand without changing battery charge.
  PowerBusState evaluate(LoadDemand load, double t_s = 0.0) const;
  /// evaluate() then discharge both strings over dt.
  PowerBusState step(LoadDemand load, double t_s, double dt_s);
  const PowerBusState& last() const { return last_; }

 private:
  PowerParams params_;
  BatteryString bat1_;
  BatteryString bat2_;
  DisableLatch latch_;
  double v_rxsm_;
  PowerBusState last_;
};

/// CSV header and row for the power trace.
std::string power_csv_header();
std::string power_csv_row(const PowerBusState& s);

}  // namespace seedsim::power
