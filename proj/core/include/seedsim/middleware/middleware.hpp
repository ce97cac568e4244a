#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/kernel/simulator.hpp"
#include "seedsim/transport/link.hpp"

namespace seedsim::middleware {

using kernel::LinkId;
using kernel::NodeId;
using kernel::SimTime;
using protocol::Bytes;
using protocol::ByteView;

struct Topic {
  std::uint16_t id = 0;
  std::string name;
  std::size_t size = 0;
  /// Link names whose gateways forward this topic.
  std::vector<std::string> links;
  /// Optional schema message carried as payload.
  std::string message;
};

struct PubSubMessage {
  std::uint16_t topic = 0;
  NodeId source;
  SimTime publish_time;
  Bytes payload;
};

using Handler = std::function<void(const PubSubMessage&)>;

struct SubscriptionHandle {
  NodeId node;
  std::uint16_t topic = 0;
  bool operator==(const SubscriptionHandle&) const = default;
};

struct GatewayTransmission {
  LinkId link;
  transport::TxStatus status = transport::TxStatus::Queued;
};

struct DeliveryReport {
  std::vector<NodeId> local_recipients;
  std::vector<GatewayTransmission> transmissions;
};

/// Gateway wire form: topic u16 LE | source address u8 | publish time i64 LE (us) | payload.
inline constexpr std::size_t kGatewayHeaderSize = 11;

/// Publish/subscribe across every node of a scenario. Same-node subscribers are called
/// synchronously; each link gateway forwards locally published messages of its topics once.
class Middleware {
 public:
  explicit Middleware(kernel::Simulator& sim) : sim_(sim) {}

  void register_topic(Topic topic);
  /// Registers topics from the scenario JSON form [{id, name, size, links, message?}].
  void register_topics(const nlohmann::json& table);
  const Topic& topic(std::uint16_t id) const;  // UnknownTopic
  const Topic& topic(std::string_view name) const;
  const std::map<std::uint16_t, Topic>& topics() const { return topics_; }

  /// Creates one gateway per endpoint of the link; the middleware becomes its receiver.
  void attach(transport::Transport& link);
  /// ScenarioError for unknown link names; ForwardingOverlap when two links that carry the same
  /// topic share a pair of endpoints.
  void validate_forwarding() const;

  SubscriptionHandle subscribe(NodeId node, std::uint16_t topic, Handler handler);
  void unsubscribe(const SubscriptionHandle& handle);

  DeliveryReport publish(NodeId node, std::uint16_t topic, ByteView payload);

  /// Inactive (unpowered) nodes neither publish nor receive.
  void set_node_active(NodeId node, bool active);
  bool node_active(NodeId node) const;

  std::uint64_t delivered(NodeId node, std::uint16_t topic) const;
  std::uint64_t dropped() const { return dropped_; }

 private:
  struct Gateway {
    NodeId node;
    transport::Transport* link = nullptr;
    std::set<std::uint16_t> forwarded;
  };

  void deliver_local(NodeId node, const PubSubMessage& message, std::vector<NodeId>* recipients);
  void on_link_receive(transport::Transport& link, NodeId from, NodeId to, ByteView bytes);
  bool forwards(const transport::Transport& link, std::uint16_t topic) const;

  kernel::Simulator& sim_;
  std::map<std::uint16_t, Topic> topics_;
  std::map<std::pair<NodeId, std::uint16_t>, Handler> subscriptions_;
  std::vector<transport::Transport*> links_;
  std::set<NodeId> inactive_;
  std::map<std::pair<NodeId, std::uint16_t>, std::uint64_t> delivered_;
  std::uint64_t dropped_ = 0;
};

}  // namespace seedsim::middleware
