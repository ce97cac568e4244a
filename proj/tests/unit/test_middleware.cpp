#include <gtest/gtest.h>

#include "seedsim/error.hpp"
#include "seedsim/middleware/middleware.hpp"
#include "seedsim/mission/scenario.hpp"
#include "seedsim/transport/can_bus.hpp"
#include "seedsim/transport/uart.hpp"

using namespace seedsim;
using namespace seedsim::middleware;
using kernel::Unit;

namespace {

const NodeId kSbc1 = NodeId::sbc(Unit::Seed1);
const NodeId kCop1 = NodeId::cop(Unit::Seed1);
const NodeId kSbc2 = NodeId::sbc(Unit::Seed2);

struct Bench {
  kernel::Simulator sim{1};
  transport::UartLink uart{sim, sim.register_link("uart1"), kSbc1, kCop1, {}};
  transport::CanBus can{sim, sim.register_link("can"), {{NodeId::rbc(), 0x10}, {kSbc1, 0x20}, {kSbc2, 0x21}}, {}};
  Middleware mw{sim};

  Bench() {
    mw.register_topic({1, "a", 4, {"uart1"}, ""});
    mw.register_topic({2, "b", 2, {"can"}, ""});
    mw.register_topic({3, "local", 1, {}, ""});
    mw.attach(uart);
    mw.attach(can);
  }
};

const Bytes kFour{1, 2, 3, 4};

}  // namespace

TEST(Middleware, SubscribeThenPublishDelivers) {
  Bench b;
  std::vector<Bytes> got;
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage& m) { got.push_back(m.payload); });
  b.mw.publish(kSbc1, 1, kFour);
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], kFour);
}

TEST(Middleware, NoRetroactiveDelivery) {
  Bench b;
  b.mw.publish(kSbc1, 1, kFour);
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  int got = 0;
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage&) { ++got; });
  b.sim.run_until(kernel::SimTime::from_seconds(2));
  EXPECT_EQ(got, 0);
}

TEST(Middleware, DoubleSubscribeStillOneCopy) {
  Bench b;
  int first = 0, second = 0;
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage&) { ++first; });
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage&) { ++second; });
  b.mw.publish(kSbc1, 1, kFour);
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  EXPECT_EQ(first + second, 1);
  EXPECT_EQ(b.mw.delivered(kCop1, 1), 1u);
}

TEST(Middleware, LocalSubscriberCalledSynchronously) {
  Bench b;
  int got = 0;
  b.mw.subscribe(kSbc1, 3, [&](const PubSubMessage&) { ++got; });
  const auto report = b.mw.publish(kSbc1, 3, Bytes{9});
  EXPECT_EQ(got, 1);
  EXPECT_EQ(report.local_recipients.size(), 1u);
  EXPECT_TRUE(report.transmissions.empty());
}

TEST(Middleware, OnlyForwardedTopicsCrossLinks) {
  Bench b;
  int got = 0;
  b.mw.subscribe(kCop1, 3, [&](const PubSubMessage&) { ++got; });
  b.mw.publish(kSbc1, 3, Bytes{9});
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  EXPECT_EQ(got, 0);
}

TEST(Middleware, CrossNodeDeliveryNeedsTransportSuccess) {
  Bench b;
  int got = 0;
  b.mw.subscribe(NodeId::rbc(), 2, [&](const PubSubMessage&) { ++got; });
  b.can.eject();
  const auto report = b.mw.publish(kSbc1, 2, Bytes{1, 2});
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  ASSERT_EQ(report.transmissions.size(), 1u);
  EXPECT_NE(report.transmissions[0].status, transport::TxStatus::Queued);
  EXPECT_EQ(got, 0);
}

TEST(Middleware, PublishTimeCarriedAcrossLink) {
  Bench b;
  kernel::SimTime seen;
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage& m) { seen = m.publish_time; });
  b.sim.schedule(kernel::SimTime::from_ms(250), kSbc1, "pub", [&] { b.mw.publish(kSbc1, 1, kFour); });
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  EXPECT_EQ(seen, kernel::SimTime::from_ms(250));
}

TEST(Middleware, Errors) {
  Bench b;
  EXPECT_THROW(
      {
        try {
          b.mw.publish(kSbc1, 99, kFour);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::UnknownTopic);
          throw;
        }
      },
      Error);
  EXPECT_THROW(
      {
        try {
          b.mw.publish(kSbc1, 1, Bytes{1});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::SizeMismatch);
          throw;
        }
      },
      Error);
  EXPECT_THROW(b.mw.register_topic({1, "dup", 1, {}, ""}), Error);
}

TEST(Middleware, InactiveNodesNeitherSendNorReceive) {
  Bench b;
  int got = 0;
  b.mw.subscribe(kCop1, 1, [&](const PubSubMessage&) { ++got; });
  b.mw.set_node_active(kCop1, false);
  b.mw.publish(kSbc1, 1, kFour);
  b.sim.run_until(kernel::SimTime::from_seconds(1));
  EXPECT_EQ(got, 0);
  b.mw.set_node_active(kCop1, true);
  b.mw.set_node_active(kSbc1, false);
  const auto r = b.mw.publish(kSbc1, 1, kFour);
  b.sim.run_until(kernel::SimTime::from_seconds(2));
  EXPECT_EQ(got, 0);
  EXPECT_TRUE(r.transmissions.empty());
}

TEST(Middleware, OverlappingForwardingRejected) {
  kernel::Simulator sim;
  transport::UartLink u1(sim, sim.register_link("u1"), kSbc1, kCop1, {});
  transport::UartLink u2(sim, sim.register_link("u2"), kSbc1, kCop1, {});
  Middleware mw(sim);
  mw.register_topic({1, "a", 1, {"u1", "u2"}, ""});
  mw.attach(u1);
  mw.attach(u2);
  try {
    mw.validate_forwarding();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ForwardingOverlap);
  }
}

TEST(Middleware, UnknownLinkInTopicRejected) {
  kernel::Simulator sim;
  Middleware mw(sim);
  mw.register_topic({1, "a", 1, {"nowhere"}, ""});
  EXPECT_THROW(mw.validate_forwarding(), Error);
}

TEST(Middleware, DefaultTopicTableValidates) {
  kernel::Simulator sim;
  transport::CanBus can(sim, sim.register_link("can"), {{NodeId::rbc(), 0x10}, {kSbc1, 0x20}, {kSbc2, 0x21}}, {});
  transport::UartLink u1(sim, sim.register_link("uart1"), kSbc1, kCop1, {});
  transport::UartLink u2(sim, sim.register_link("uart2"), kSbc2, NodeId::cop(Unit::Seed2), {});
  Middleware mw(sim);
  mw.register_topics(mission::default_topic_table());
  mw.attach(can);
  mw.attach(u1);
  mw.attach(u2);
  EXPECT_NO_THROW(mw.validate_forwarding());
  EXPECT_EQ(mw.topics().size(), 7u);
}

// Random publish storms over both links: every subscriber sees each message exactly once.
TEST(Middleware, AtMostOnceUnderRandomTraffic) {
  Bench b;
  auto rng = b.sim.rng("traffic");
  std::map<std::pair<NodeId, std::uint16_t>, int> got;
  for (auto n : {kCop1, NodeId::rbc(), kSbc2}) {
    for (std::uint16_t t : {1, 2}) b.mw.subscribe(n, t, [&, n, t](const PubSubMessage&) { ++got[{n, t}]; });
  }
  int sent1 = 0, sent2 = 0;
  for (int i = 0; i < 300; ++i) {
    const auto at = kernel::SimTime::from_us(std::int64_t(rng.uniform() * 1e6));
    const bool topic_a = rng.bernoulli(0.5);
    (topic_a ? sent1 : sent2)++;
    b.sim.schedule(at, kSbc1, "pub", [&b, topic_a] {
      if (topic_a) {
        b.mw.publish(kSbc1, 1, kFour);
      } else {
        b.mw.publish(kSbc1, 2, Bytes{5, 6});
      }
    });
  }
  b.sim.run_until(kernel::SimTime::from_seconds(10));
  EXPECT_EQ((got[{kCop1, 1}]), sent1);
  EXPECT_EQ((got[{NodeId::rbc(), 2}]), sent2);
  EXPECT_EQ((got[{kSbc2, 2}]), sent2);
  EXPECT_EQ((got[{NodeId::rbc(), 1}]), 0);
  EXPECT_EQ((got[{kCop1, 2}]), 0);
}
