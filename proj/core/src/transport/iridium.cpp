#include "seedsim/transport/iridium.hpp"

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::transport {

IridiumService::IridiumService(kernel::Simulator& sim, IridiumParams params, SbdEndpoint& endpoint)
    : sim_(sim), params_(params), endpoint_(endpoint) {
  if (params_.latency_max_s < params_.latency_min_s || params_.latency_min_s < 0.0) {
    throw Error(Errc::ScenarioError, "iridium latency bounds must satisfy 0 <= min <= max");
  }
}

kernel::RngStream& IridiumService::stream(NodeId seed) {
  auto it = streams_.find(seed);
  if (it == streams_.end()) it = streams_.emplace(seed, sim_.rng("iridium." + seed.name())).first;
  return it->second;
}

DeliveryOutcome IridiumService::send_sbd(NodeId seed, ByteView payload) {
  if (payload.size() > params_.max_payload) {
    throw Error(Errc::PayloadTooLarge, fmt::format("{} bytes exceeds SBD limit {}", payload.size(), params_.max_payload));
  }
  auto& rng = stream(seed);
  // Both draws are always taken, keeping the stream aligned whatever the outcome.
  const bool lost = rng.uniform() < params_.per_message_loss;
  const double latency = rng.uniform(params_.latency_min_s, params_.latency_max_s);

  const std::size_t index = log_.size();
  log_.push_back(SbdDelivery{seed, sim_.now(), std::nullopt, Bytes(payload.begin(), payload.end())});
  if (lost) {
    sim_.note(fmt::format("sbd drop {} {}B", seed.name(), payload.size()));
    return DeliveryOutcome::Dropped;
  }
  sim_.note(fmt::format("sbd send {} {}B latency={:.3f}", seed.name(), payload.size(), latency));
  sim_.schedule(sim_.now() + kernel::SimTime::from_seconds(latency), kernel::NodeId::ground(), "iridium.deliver",
                [this, index] {
                  auto& entry = log_[index];
                  entry.delivered = sim_.now();
                  sim_.note(fmt::format("sbd deliver {} {}B", entry.seed.name(), entry.payload.size()));
                  endpoint_.deliver(protocol::wrap_sbd_tcp(entry.payload));
                });
  return DeliveryOutcome::Scheduled;
}

}  // namespace seedsim::transport
