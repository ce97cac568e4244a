#include "seedsim/transport/umbilical.hpp"

#include <fmt/format.h>

namespace seedsim::transport {

Umbilical::Umbilical(kernel::Simulator& sim, CanBus& can, UmbilicalParams params)
    : sim_(sim), can_(can), params_(params) {}

void Umbilical::sever() {
  if (severed_) return;
  severed_ = true;
  sever_time_ = sim_.now();
  can_.eject();
  sim_.note("umbilical severed: v_rxsm=0 can detached");
  notify();
}

void Umbilical::schedule_sever(kernel::SimTime time) {
  sim_.schedule(time, kernel::NodeId::rbc(), "umbilical.sever", [this] { sever(); });
}

void Umbilical::set_supply(bool on) {
  if (supply_on_ == on) return;
  supply_on_ = on;
  sim_.note(fmt::format("rxsm supply {}", on ? "on" : "off"));
  notify();
}

void Umbilical::notify() {
  for (auto& observer : observers_) observer();
}

}  // namespace seedsim::transport
