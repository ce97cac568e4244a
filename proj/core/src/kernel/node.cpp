#include "seedsim/kernel/node.hpp"

#include <algorithm>

#include "seedsim/error.hpp"

namespace seedsim {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::PastEvent: return "PastEvent";
    case Errc::ScenarioError: return "ScenarioError";
    case Errc::UnknownTopic: return "UnknownTopic";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::ForwardingOverlap: return "ForwardingOverlap";
    case Errc::BusError: return "BusError";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::NoSource: return "NoSource";
    case Errc::SequenceViolation: return "SequenceViolation";
    case Errc::PhaseError: return "PhaseError";
    case Errc::OutOfModel: return "OutOfModel";
    case Errc::CorruptRecord: return "CorruptRecord";
    case Errc::SequenceGap: return "SequenceGap";
    case Errc::BadSync: return "BadSync";
    case Errc::BadCrc: return "BadCrc";
    case Errc::BadSignature: return "BadSignature";
    case Errc::ReplayDetected: return "ReplayDetected";
    case Errc::Truncated: return "Truncated";
    case Errc::BadLength: return "BadLength";
    case Errc::DuplicateMsgId: return "DuplicateMsgId";
    case Errc::UnknownType: return "UnknownType";
    case Errc::UnknownVersion: return "UnknownVersion";
    case Errc::WrongLength: return "WrongLength";
    case Errc::UnknownMessage: return "UnknownMessage";
    case Errc::BadMagic: return "BadMagic";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::Timeout: return "Timeout";
    case Errc::NotFound: return "NotFound";
    case Errc::NoSignal: return "NoSignal";
    case Errc::MaxStepsExceeded: return "MaxStepsExceeded";
    case Errc::TooShort: return "TooShort";
    case Errc::NoRotation: return "NoRotation";
    case Errc::MissingChannels: return "MissingChannels";
  }
  return "Unknown";
}

}  // namespace seedsim

namespace seedsim::kernel {

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Rbc: return "rbc";
    case NodeKind::Sbc: return "sbc";
    case NodeKind::Cop: return "cop";
    case NodeKind::GroundBackend: return "ground";
    case NodeKind::RecoveryDevice: return "recovery";
  }
  return "?";
}

std::string_view to_string(Unit unit) noexcept {
  switch (unit) {
    case Unit::Rocket: return "rocket";
    case Unit::Seed1: return "seed1";
    case Unit::Seed2: return "seed2";
    case Unit::Ground: return "ground";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto kind : {NodeKind::Rbc, NodeKind::Sbc, NodeKind::Cop, NodeKind::GroundBackend,
                    NodeKind::RecoveryDevice}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::optional<Unit> parse_unit(std::string_view text) {
  for (auto unit : {Unit::Rocket, Unit::Seed1, Unit::Seed2, Unit::Ground}) {
    if (text == to_string(unit)) return unit;
  }
  return std::nullopt;
}

std::string NodeId::name() const {
  if (kind == NodeKind::GroundBackend || kind == NodeKind::RecoveryDevice || kind == NodeKind::Rbc) {
    return std::string(to_string(kind));
  }
  return std::string(to_string(kind)) + (unit == Unit::Seed1 ? "1" : "2");
}

std::uint8_t NodeId::address() const {
  switch (kind) {
    case NodeKind::Rbc: return kAddressRbc;
    case NodeKind::Sbc: return unit == Unit::Seed1 ? kAddressSbc1 : kAddressSbc2;
    case NodeKind::Cop: return unit == Unit::Seed1 ? kAddressCop1 : kAddressCop2;
    case NodeKind::GroundBackend: return kAddressGround;
    case NodeKind::RecoveryDevice: return kAddressRecovery;
  }
  return kAddressBroadcast;
}

std::optional<NodeId> NodeId::from_address(std::uint8_t address) {
  switch (address) {
    case kAddressRbc: return rbc();
    case kAddressSbc1: return sbc(Unit::Seed1);
    case kAddressSbc2: return sbc(Unit::Seed2);
    case kAddressCop1: return cop(Unit::Seed1);
    case kAddressCop2: return cop(Unit::Seed2);
    case kAddressGround: return ground();
    case kAddressRecovery: return recovery_device();
    default: return std::nullopt;
  }
}

void NodeRegistry::add(NodeId node) {
  if (contains(node)) {
    throw Error(Errc::ScenarioError, "duplicate node " + node.name());
  }
  nodes_.push_back(node);
}

bool NodeRegistry::contains(NodeId node) const {
  return std::find(nodes_.begin(), nodes_.end(), node) != nodes_.end();
}

void NodeRegistry::validate_topology() const {
  auto count = [&](NodeKind kind) {
    return std::count_if(nodes_.begin(), nodes_.end(), [&](NodeId n) { return n.kind == kind; });
  };
  if (count(NodeKind::Rbc) != 1 || !contains(NodeId::rbc())) {
    throw Error(Errc::ScenarioError, "exactly one RBC on the rocket is required");
  }
  for (auto kind : {NodeKind::Sbc, NodeKind::Cop}) {
    if (count(kind) != 2 || !contains(NodeId{kind, Unit::Seed1}) ||
        !contains(NodeId{kind, Unit::Seed2})) {
      throw Error(Errc::ScenarioError,
                  std::string("exactly two ") + std::string(to_string(kind)) + " nodes (seed1, seed2) are required");
    }
  }
}

NodeRegistry NodeRegistry::standard() {
  NodeRegistry registry;
  registry.add(NodeId::rbc());
  for (auto unit : {Unit::Seed1, Unit::Seed2}) {
    registry.add(NodeId::sbc(unit));
    registry.add(NodeId::cop(unit));
  }
  registry.add(NodeId::ground());
  registry.add(NodeId::recovery_device());
  return registry;
}

}  // namespace seedsim::kernel
