#pragma once

#include <deque>
#include <map>
#include <optional>

#include "seedsim/kernel/simulator.hpp"
#include "seedsim/transport/link.hpp"

namespace seedsim::transport {

struct CanParams {
  double bitrate = 500000.0;
};

struct CanMember {
  NodeId node;
  std::uint16_t arbitration_id = 0;  // 11 bit
  bool operator==(const CanMember&) const = default;
};

/// Frame-level arbitration: lowest identifier wins. Throws BusError on an unterminated segment,
/// ScenarioError for empty or duplicate-id contention sets.
std::vector<CanMember> can_arbitrate(std::vector<CanMember> contenders, bool terminated = true);

/// Bits on the wire for one standard-identifier data frame (no stuffing).
int can_frame_bits(std::size_t data_bytes) noexcept;

struct CanTransmission {
  kernel::SimTime time;
  NodeId node;
  std::uint16_t arbitration_id = 0;
};

/// RBC and both SBCs on one bus until ejection. Messages are fragmented into 8-byte frames;
/// every frame contends, is acknowledged, and messages are reassembled per sender.
/// Ejection splits the bus: the seed stubs detach and the rocket-side segment loses its
/// termination, after which every transmission fails with BusError.
class CanBus final : public Transport {
 public:
  CanBus(kernel::Simulator& sim, LinkId id, std::vector<CanMember> members, CanParams params);

  LinkId id() const override { return id_; }
  const std::vector<NodeId>& endpoints() const override { return endpoints_; }
  void set_receiver(Receiver receiver) override { receiver_ = std::move(receiver); }
  TxStatus send(NodeId from, Bytes bytes) override;

  void eject();
  bool intact() const { return intact_; }
  bool terminated(NodeId node) const;
  std::uint16_t arbitration_id(NodeId node) const;

  std::uint64_t bus_errors() const { return bus_errors_; }
  std::uint64_t frames_acked() const { return frames_acked_; }
  const std::vector<CanTransmission>& transmissions() const { return transmissions_; }

 private:
  struct PendingFrame {
    Bytes data;
    bool last = false;
  };
  struct Member {
    CanMember info;
    std::deque<PendingFrame> queue;
    Bytes reassembly;
  };

  Member* member(NodeId node);
  void kick();
  void arbitrate();
  void complete(std::size_t winner, std::uint64_t generation);

  kernel::Simulator& sim_;
  LinkId id_;
  CanParams params_;
  std::vector<Member> members_;
  std::vector<NodeId> endpoints_;
  Receiver receiver_;
  bool intact_ = true;
  bool busy_ = false;
  std::uint64_t generation_ = 0;
  std::uint64_t bus_errors_ = 0;
  std::uint64_t frames_acked_ = 0;
  std::vector<CanTransmission> transmissions_;
};

}  // namespace seedsim::transport
