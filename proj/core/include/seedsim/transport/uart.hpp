#pragma once

#include <array>

#include "seedsim/kernel/simulator.hpp"
#include "seedsim/transport/link.hpp"

namespace seedsim::transport {

struct UartParams {
  double bitrate = 115200.0;
  double byte_error_rate = 0.0;
  int bits_per_byte = 10;  // start + 8 data + stop
};

/// Full-duplex point-to-point serial link. Each direction is FIFO; a message occupies the line
/// for bytes * bits_per_byte / bitrate. A message with any corrupted byte is dropped whole.
class UartLink final : public Transport {
 public:
  UartLink(kernel::Simulator& sim, LinkId id, NodeId a, NodeId b, UartParams params);

  LinkId id() const override { return id_; }
  const std::vector<NodeId>& endpoints() const override { return endpoints_; }
  void set_receiver(Receiver receiver) override { receiver_ = std::move(receiver); }
  TxStatus send(NodeId from, Bytes bytes) override;

  void set_up(bool up) { up_ = up; }
  bool up() const { return up_; }
  kernel::SimTime transfer_time(std::size_t bytes) const;

  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  kernel::Simulator& sim_;
  LinkId id_;
  std::vector<NodeId> endpoints_;
  UartParams params_;
  kernel::RngStream rng_;
  Receiver receiver_;
  std::array<kernel::SimTime, 2> busy_until_{};
  bool up_ = true;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace seedsim::transport
