#pragma once

#include <functional>

#include "seedsim/kernel/simulator.hpp"
#include "seedsim/transport/can_bus.hpp"

namespace seedsim::transport {

struct UmbilicalParams {
  double supply_voltage = 28.0;
};

/// RXSM supply relayed by the RBC, plus the seed-side CAN stubs. Severing removes both in the
/// same event, so no observer ever sees power and bus disagree.
class Umbilical {
 public:
  using Observer = std::function<void()>;

  Umbilical(kernel::Simulator& sim, CanBus& can, UmbilicalParams params = {});

  double v_rxsm() const { return (severed_ || !supply_on_) ? 0.0 : params_.supply_voltage; }
  bool severed() const { return severed_; }
  std::optional<kernel::SimTime> sever_time() const { return sever_time_; }

  void sever();
  void schedule_sever(kernel::SimTime time);
  /// RBC relay for the RXSM supply (radio silence cuts it).
  void set_supply(bool on);
  bool supply_on() const { return supply_on_; }

  void on_change(Observer observer) { observers_.push_back(std::move(observer)); }

 private:
  void notify();

  kernel::Simulator& sim_;
  CanBus& can_;
  UmbilicalParams params_;
  bool severed_ = false;
  bool supply_on_ = true;
  std::optional<kernel::SimTime> sever_time_;
  std::vector<Observer> observers_;
};

}  // namespace seedsim::transport
