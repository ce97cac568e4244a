#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "seedsim/kernel/node.hpp"
#include "seedsim/protocol/bytes.hpp"

namespace seedsim::transport {

using kernel::LinkId;
using kernel::NodeId;
using protocol::Bytes;
using protocol::ByteView;

enum class TxStatus { Queued, BusError, LinkDown };

std::string_view to_string(TxStatus status) noexcept;

/// A physical link carrying opaque byte messages between its endpoints.
class Transport {
 public:
  using Receiver = std::function<void(NodeId from, NodeId to, ByteView bytes)>;

  virtual ~Transport() = default;

  virtual LinkId id() const = 0;
  virtual const std::vector<NodeId>& endpoints() const = 0;
  /// Invoked once per receiving endpoint when a message is delivered.
  virtual void set_receiver(Receiver receiver) = 0;
  /// Queues a message for transmission; failures are reported, never thrown.
  virtual TxStatus send(NodeId from, Bytes bytes) = 0;
};

}  // namespace seedsim::transport
