#include "seedsim/transport/uart.hpp"

#include <cmath>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::transport {

std::string_view to_string(TxStatus status) noexcept {
  switch (status) {
    case TxStatus::Queued: return "queued";
    case TxStatus::BusError: return "bus-error";
    case TxStatus::LinkDown: return "link-down";
  }
  return "?";
}

UartLink::UartLink(kernel::Simulator& sim, LinkId id, NodeId a, NodeId b, UartParams params)
    : sim_(sim), id_(id), endpoints_{a, b}, params_(params), rng_(sim.rng("uart." + sim.link_name(id))) {
  if (params_.bitrate <= 0.0) throw Error(Errc::ScenarioError, "uart bitrate must be positive");
}

kernel::SimTime UartLink::transfer_time(std::size_t bytes) const {
  const double seconds = static_cast<double>(bytes) * params_.bits_per_byte / params_.bitrate;
  return kernel::SimTime::from_us(static_cast<std::int64_t>(std::ceil(seconds * 1e6)));
}

TxStatus UartLink::send(NodeId from, Bytes bytes) {
  int direction = 0;
  if (from == endpoints_[1]) {
    direction = 1;
  } else if (from != endpoints_[0]) {
    throw Error(Errc::ScenarioError, fmt::format("{} is not an endpoint of {}", from.name(), sim_.link_name(id_)));
  }
  if (!up_) return TxStatus::LinkDown;
  const NodeId to = endpoints_[1 - direction];

  bool corrupted = false;
  if (params_.byte_error_rate > 0.0) {
    const double p_clean = std::pow(1.0 - params_.byte_error_rate, static_cast<double>(bytes.size()));
    corrupted = !rng_.bernoulli(p_clean);
  }

  const auto start = std::max(sim_.now(), busy_until_[direction]);
  const auto done = start + transfer_time(bytes.size());
  busy_until_[direction] = done;
  sim_.schedule(done, id_, "uart.rx", [this, from, to, corrupted, payload = std::move(bytes)]() {
    if (!up_ || corrupted) {
      ++dropped_;
      sim_.note(fmt::format("drop {}->{} {}B", from.name(), to.name(), payload.size()));
      return;
    }
    ++delivered_;
    sim_.note(fmt::format("{}->{} {}B", from.name(), to.name(), payload.size()));
    if (receiver_) receiver_(from, to, payload);
  });
  return TxStatus::Queued;
}

}  // namespace seedsim::transport
