#include "seedsim/middleware/middleware.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::middleware {


void Middleware::register_topic(Topic topic) {
  if (topics_.count(topic.id) != 0) {
    throw Error(Errc::ScenarioError, fmt::format("duplicate topic id {}", topic.id));
  }
  for (const auto& [id, existing] : topics_) {
    if (existing.name == topic.name) throw Error(Errc::ScenarioError, "duplicate topic name " + topic.name);
  }
  topics_.emplace(topic.id, std::move(topic));
}

void Middleware::register_topics(const nlohmann::json& table) {
  for (const auto& entry : table) {
    Topic t;
    t.id = entry.at("id").get<std::uint16_t>();
    t.name = entry.at("name").get<std::string>();
    t.size = entry.at("size").get<std::size_t>();
    t.links = entry.value("links", std::vector<std::string>{});
    t.message = entry.value("message", std::string{});
    register_topic(std::move(t));
  }
}

const Topic& Middleware::topic(std::uint16_t id) const {
  auto it = topics_.find(id);
  if (it == topics_.end()) throw Error(Errc::UnknownTopic, fmt::format("topic id {}", id));
  return it->second;
}

const Topic& Middleware::topic(std::string_view name) const {
  for (const auto& [id, t] : topics_) {
    if (t.name == name) return t;
  }
  throw Error(Errc::UnknownTopic, fmt::format("topic '{}'", name));
}

void Middleware::attach(transport::Transport& link) {
  links_.push_back(&link);
  link.set_receiver([this, &link](NodeId from, NodeId to, ByteView bytes) { on_link_receive(link, from, to, bytes); });
}

bool Middleware::forwards(const transport::Transport& link, std::uint16_t topic_id) const {
  const auto& t = topic(topic_id);
  const auto& name = sim_.link_name(link.id());
  return std::find(t.links.begin(), t.links.end(), name) != t.links.end();
}

void Middleware::validate_forwarding() const {
  for (const auto& [id, t] : topics_) {
    std::vector<const transport::Transport*> carriers;
    for (const auto& link_name : t.links) {
      auto it = std::find_if(links_.begin(), links_.end(),
                             [&](const transport::Transport* l) { return sim_.link_name(l->id()) == link_name; });
      if (it == links_.end()) {
        throw Error(Errc::ScenarioError, fmt::format("topic '{}' names unknown link '{}'", t.name, link_name));
      }
      carriers.push_back(*it);
    }
    for (std::size_t a = 0; a < carriers.size(); ++a) {
      for (std::size_t b = a + 1; b < carriers.size(); ++b) {
        std::size_t shared = 0;
        for (const auto& node : carriers[a]->endpoints()) {
          const auto& other = carriers[b]->endpoints();
          shared += static_cast<std::size_t>(std::count(other.begin(), other.end(), node));
        }
        if (shared >= 2) {
          throw Error(Errc::ForwardingOverlap,
                      fmt::format("topic '{}' forwarded on both '{}' and '{}', which share endpoints", t.name,
                                  sim_.link_name(carriers[a]->id()), sim_.link_name(carriers[b]->id())));
        }
      }
    }
  }
}

SubscriptionHandle Middleware::subscribe(NodeId node, std::uint16_t topic_id, Handler handler) {
  topic(topic_id);
  subscriptions_.try_emplace({node, topic_id}, std::move(handler));
  return SubscriptionHandle{node, topic_id};
}

void Middleware::unsubscribe(const SubscriptionHandle& handle) { subscriptions_.erase({handle.node, handle.topic}); }

void Middleware::set_node_active(NodeId node, bool active) {
  if (active) {
    inactive_.erase(node);
  } else {
    inactive_.insert(node);
  }
}

bool Middleware::node_active(NodeId node) const { return inactive_.count(node) == 0; }

std::uint64_t Middleware::delivered(NodeId node, std::uint16_t topic_id) const {
  auto it = delivered_.find({node, topic_id});
  return it == delivered_.end() ? 0 : it->second;
}

void Middleware::deliver_local(NodeId node, const PubSubMessage& message, std::vector<NodeId>* recipients) {
  if (!node_active(node)) return;
  auto it = subscriptions_.find({node, message.topic});
  if (it == subscriptions_.end()) return;
  ++delivered_[{node, message.topic}];
  if (recipients != nullptr) recipients->push_back(node);
  // Copy: the handler may unsubscribe itself.
  Handler handler = it->second;
  handler(message);
}

DeliveryReport Middleware::publish(NodeId node, std::uint16_t topic_id, ByteView payload) {
  const Topic& t = topic(topic_id);
  if (payload.size() != t.size) {
    throw Error(Errc::SizeMismatch,
                fmt::format("topic '{}' carries {} bytes, got {}", t.name, t.size, payload.size()));
  }
  DeliveryReport report;
  if (!node_active(node)) return report;

  PubSubMessage message{topic_id, node, sim_.now(), Bytes(payload.begin(), payload.end())};
  deliver_local(node, message, &report.local_recipients);

  for (auto* link : links_) {
    const auto& endpoints = link->endpoints();
    if (std::find(endpoints.begin(), endpoints.end(), node) == endpoints.end()) continue;
    if (!forwards(*link, topic_id)) continue;
    Bytes wire;
    wire.reserve(kGatewayHeaderSize + payload.size());
    protocol::ByteWriter w(wire);
    w.put<std::uint16_t>(topic_id);
    w.put<std::uint8_t>(node.address());
    w.put<std::int64_t>(message.publish_time.us());
    w.put_bytes(payload);
    const auto status = link->send(node, std::move(wire));
    report.transmissions.push_back({link->id(), status});
  }
  sim_.note(fmt::format("pub {} from={} local={} gw={}", t.name, node.name(), report.local_recipients.size(),
                        report.transmissions.size()));
  return report;
}

void Middleware::on_link_receive(transport::Transport& link, NodeId /*from*/, NodeId to, ByteView bytes) {
  try {
    protocol::ByteReader r(bytes);
    PubSubMessage message;
    message.topic = r.get<std::uint16_t>();
    const auto source = NodeId::from_address(r.get<std::uint8_t>());
    message.publish_time = SimTime::from_us(r.get<std::int64_t>());
    const auto payload = r.get_bytes(r.remaining());
    const Topic& t = topic(message.topic);
    if (!source || payload.size() != t.size || !forwards(link, message.topic)) {
      ++dropped_;
      return;
    }
    message.source = *source;
    message.payload.assign(payload.begin(), payload.end());
    deliver_local(to, message, nullptr);
  } catch (const Error&) {
    ++dropped_;
  }
}

}  // namespace seedsim::middleware
