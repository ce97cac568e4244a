#include "seedsim/transport/can_bus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::transport {

std::vector<CanMember> can_arbitrate(std::vector<CanMember> contenders, bool terminated) {
  if (!terminated) throw Error(Errc::BusError, "segment has no termination; arbitration impossible");
  if (contenders.empty()) throw Error(Errc::ScenarioError, "arbitration needs at least one contender");
  std::set<std::uint16_t> ids;
  for (const auto& c : contenders) {
    if (c.arbitration_id > 0x7FF) throw Error(Errc::ScenarioError, "arbitration id exceeds 11 bits");
    if (!ids.insert(c.arbitration_id).second) {
      throw Error(Errc::ScenarioError, fmt::format("duplicate arbitration id 0x{:03x}", c.arbitration_id));
    }
  }
  std::sort(contenders.begin(), contenders.end(),
            [](const CanMember& a, const CanMember& b) { return a.arbitration_id < b.arbitration_id; });
  return contenders;
}

int can_frame_bits(std::size_t data_bytes) noexcept {
  // SOF, 11-bit id, RTR, IDE, r0, DLC, data, CRC15 + delimiter, ACK slot + delimiter, EOF, IFS.
  return 1 + 11 + 1 + 1 + 1 + 4 + static_cast<int>(8 * data_bytes) + 16 + 2 + 7 + 3;
}

CanBus::CanBus(kernel::Simulator& sim, LinkId id, std::vector<CanMember> members, CanParams params)
    : sim_(sim), id_(id), params_(params) {
  std::vector<CanMember> check = members;
  can_arbitrate(check);
  for (auto& m : members) {
    endpoints_.push_back(m.node);
    members_.push_back(Member{m, {}, {}});
  }
}

CanBus::Member* CanBus::member(NodeId node) {
  for (auto& m : members_) {
    if (m.info.node == node) return &m;
  }
  return nullptr;
}

bool CanBus::terminated(NodeId node) const {
  (void)node;
  // Termination sits on the seed side of the interface; once split, no segment is terminated.
  return intact_;
}

std::uint16_t CanBus::arbitration_id(NodeId node) const {
  for (const auto& m : members_) {
    if (m.info.node == node) return m.info.arbitration_id;
  }
  throw Error(Errc::ScenarioError, node.name() + " is not on the CAN bus");
}

TxStatus CanBus::send(NodeId from, Bytes bytes) {
  Member* m = member(from);
  if (m == nullptr) throw Error(Errc::ScenarioError, from.name() + " is not on the CAN bus");
  if (!terminated(from)) {
    ++bus_errors_;
    sim_.note(fmt::format("can bus-error from={} id=0x{:03x}", from.name(), m->info.arbitration_id));
    return TxStatus::BusError;
  }
  const std::size_t frames = std::max<std::size_t>(1, (bytes.size() + 7) / 8);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t begin = i * 8;
    const std::size_t end = std::min(bytes.size(), begin + 8);
    m->queue.push_back(PendingFrame{Bytes(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                                          bytes.begin() + static_cast<std::ptrdiff_t>(end)),
                                    i + 1 == frames});
  }
  kick();
  return TxStatus::Queued;
}

void CanBus::kick() {
  if (busy_) return;
  busy_ = true;
  sim_.schedule(sim_.now(), id_, "can.arbitrate", [this] { arbitrate(); });
}

void CanBus::arbitrate() {
  std::vector<CanMember> contenders;
  for (const auto& m : members_) {
    if (!m.queue.empty()) contenders.push_back(m.info);
  }
  if (contenders.empty()) {
    busy_ = false;
    return;
  }
  const std::vector<CanMember> order = can_arbitrate(contenders, intact_);
  const CanMember& winner = order.front();
  std::size_t index = 0;
  while (members_[index].info.node != winner.node) ++index;
  const auto& frame = members_[index].queue.front();
  const double seconds = can_frame_bits(frame.data.size()) / params_.bitrate;
  const auto duration = kernel::SimTime::from_us(static_cast<std::int64_t>(std::ceil(seconds * 1e6)));
  transmissions_.push_back({sim_.now(), winner.node, winner.arbitration_id});
  sim_.note(fmt::format("winner={} id=0x{:03x} contenders={}", winner.node.name(), winner.arbitration_id,
                        contenders.size()));
  const auto generation = generation_;
  sim_.schedule(sim_.now() + duration, id_, "can.frame", [this, index, generation] { complete(index, generation); });
}

void CanBus::complete(std::size_t winner, std::uint64_t generation) {
  if (generation != generation_) return;  // bus split while the frame was on the wire
  Member& sender = members_[winner];
  PendingFrame frame = std::move(sender.queue.front());
  sender.queue.pop_front();
  sender.reassembly.insert(sender.reassembly.end(), frame.data.begin(), frame.data.end());
  const NodeId from = sender.info.node;
  const bool last = frame.last;
  sim_.note(fmt::format("{} {}B{}", from.name(), frame.data.size(), last ? " last" : ""));

  // Any other node on the intact bus acknowledges in the ACK slot.
  sim_.schedule(sim_.now(), id_, "can.ack", [this, from, winner, last, generation] {
    if (generation != generation_) return;
    ++frames_acked_;
    sim_.note(fmt::format("ack {}", from.name()));
    if (last) {
      Bytes message = std::move(members_[winner].reassembly);
      members_[winner].reassembly.clear();
      for (const auto& m : members_) {
        if (m.info.node != from && receiver_) receiver_(from, m.info.node, message);
      }
    }
    busy_ = false;
    kick();
  });
}

void CanBus::eject() {
  if (!intact_) return;
  intact_ = false;
  ++generation_;
  busy_ = false;
  for (auto& m : members_) {
    if (!m.queue.empty()) {
      bus_errors_ += m.queue.size();
      m.queue.clear();
    }
    m.reassembly.clear();
  }
  sim_.note("can split: seed stubs detached, rocket segment unterminated");
}

}  // namespace seedsim::transport
