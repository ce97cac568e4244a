#pragma once

#include <map>

#include "seedsim/kernel/simulator.hpp"
#include "seedsim/protocol/sbd.hpp"
#include "seedsim/transport/link.hpp"

namespace seedsim::transport {

struct IridiumParams {
  double per_message_loss = 0.02;
  /// Uniform delivery latency; the constellation is summarised by loss and latency.
  double latency_min_s = 10.0;
  double latency_max_s = 60.0;
  std::size_t max_payload = protocol::kIridiumMaxPayload;
};

/// Receiving end of the gateway: gets the backend TCP wire bytes (magic, length, payload).
class SbdEndpoint {
 public:
  virtual ~SbdEndpoint() = default;
  virtual void deliver(ByteView wire) = 0;
};

enum class DeliveryOutcome { Scheduled, Dropped };

struct SbdDelivery {
  NodeId seed;
  kernel::SimTime sent;
  std::optional<kernel::SimTime> delivered;
  Bytes payload;
};

/// Mobile-originated short burst data from the seeds to the backend.
class IridiumService {
 public:
  IridiumService(kernel::Simulator& sim, IridiumParams params, SbdEndpoint& endpoint);

  /// Throws PayloadTooLarge above max_payload. With probability (1 - loss) the payload is
  /// delivered byte-identical to the endpoint after a latency draw.
  DeliveryOutcome send_sbd(NodeId seed, ByteView payload);

  const std::vector<SbdDelivery>& log() const { return log_; }
  const IridiumParams& params() const { return params_; }

 private:
  kernel::RngStream& stream(NodeId seed);

  kernel::Simulator& sim_;
  IridiumParams params_;
  SbdEndpoint& endpoint_;
  std::map<NodeId, kernel::RngStream> streams_;
  std::vector<SbdDelivery> log_;
};

}  // namespace seedsim::transport
