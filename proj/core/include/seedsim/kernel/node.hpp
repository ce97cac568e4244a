#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seedsim::kernel {

enum class NodeKind : std::uint8_t { Rbc, Sbc, Cop, GroundBackend, RecoveryDevice };
enum class Unit : std::uint8_t { Rocket, Seed1, Seed2, Ground };

std::string_view to_string(NodeKind kind) noexcept;
std::string_view to_string(Unit unit) noexcept;
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<Unit> parse_unit(std::string_view text);

// Frame routing addresses (src/dst bytes).
inline constexpr std::uint8_t kAddressRbc = 0x01;
inline constexpr std::uint8_t kAddressSbc1 = 0x11;
inline constexpr std::uint8_t kAddressSbc2 = 0x12;
inline constexpr std::uint8_t kAddressCop1 = 0x21;
inline constexpr std::uint8_t kAddressCop2 = 0x22;
inline constexpr std::uint8_t kAddressGround = 0xF0;
inline constexpr std::uint8_t kAddressRecovery = 0xF1;
inline constexpr std::uint8_t kAddressBroadcast = 0xFF;

struct NodeId {
  NodeKind kind = NodeKind::Rbc;
  Unit unit = Unit::Rocket;

  static constexpr NodeId rbc() { return {NodeKind::Rbc, Unit::Rocket}; }
  static constexpr NodeId sbc(Unit seed) { return {NodeKind::Sbc, seed}; }
  static constexpr NodeId cop(Unit seed) { return {NodeKind::Cop, seed}; }
  static constexpr NodeId ground() { return {NodeKind::GroundBackend, Unit::Ground}; }
  static constexpr NodeId recovery_device() { return {NodeKind::RecoveryDevice, Unit::Ground}; }

  /// "rbc", "sbc1", "cop2", "ground", ...
  std::string name() const;
  std::uint8_t address() const;
  static std::optional<NodeId> from_address(std::uint8_t address);

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline constexpr int seed_index(Unit unit) { return unit == Unit::Seed1 ? 0 : 1; }
inline constexpr Unit seed_unit(int index) { return index == 0 ? Unit::Seed1 : Unit::Seed2; }

struct LinkId {
  std::uint16_t value = 0;
  constexpr auto operator<=>(const LinkId&) const = default;
};

class NodeRegistry {
 public:
  void add(NodeId node);
  bool contains(NodeId node) const;
  const std::vector<NodeId>& nodes() const { return nodes_; }

  /// Throws ScenarioError unless the space segment is one RBC plus SBC/COP pairs on both seeds.
  void validate_topology() const;

  static NodeRegistry standard();

 private:
  std::vector<NodeId> nodes_;
};

}  // namespace seedsim::kernel
