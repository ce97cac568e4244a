#include <gtest/gtest.h>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include "expect.hpp"
#include "seedsim/ground/store.hpp"

using namespace seedsim;
using namespace seedsim::ground;
namespace fs = std::filesystem;

namespace {
fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("seedsim_store_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

IngestRecord make(int i) {
  IngestRecord r;
  r.receive_time = "2024-03-14T10:00:00.000000Z";
  r.channel = i % 3 == 0 ? Channel::Iridium : Channel::Rxsm;
  r.origin = "sbc1";
  r.message = "seed_status";
  r.fields = {{"counter", {{"value", i}}}};
  r.raw = "d2";
  if (i % 7 == 0) r.error = "BadCrc";
  return r;
}

// Every line parses and seq runs 1..n.
std::size_t check_log(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::uint64_t expect = 1;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("seq").get<std::uint64_t>(), expect);
    ++expect;
  }
  return expect - 1;
}
}  // namespace

TEST(RecordStore, GaplessSequenceFromOne) {
  RecordStore s;
  for (int i = 0; i < 50; ++i) {
    auto r = make(i);
    EXPECT_EQ(s.append(r), std::uint64_t(i + 1));
    EXPECT_EQ(r.seq, std::uint64_t(i + 1));
  }
  std::vector<IngestRecord> batch{make(1), make(2), make(3)};
  EXPECT_EQ(s.append(batch), (std::vector<std::uint64_t>{51, 52, 53}));
  EXPECT_EQ(s.last_seq(), 53u);
  const auto tail = s.since(50);
  ASSERT_EQ(tail.size(), 3u);
  EXPECT_EQ(tail.front().seq, 51u);
  EXPECT_EQ(s.since(0, 10).size(), 10u);
  EXPECT_TRUE(s.since(53).empty());
  EXPECT_TRUE(s.since(1000).empty());
}

TEST(RecordStore, JsonRoundTrip) {
  auto r = make(14);
  r.seq = 9;
  const auto back = IngestRecord::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_TRUE(back.quarantined());
  auto bad = r.to_json();
  bad["channel"] = "carrier-pigeon";
  EXPECT_ERRC(IngestRecord::from_json(bad), Errc::CorruptRecord);
}

TEST(RecordStore, ReopenContinuesNumbering) {
  const auto p = temp_file("reopen.jsonl");
  {
    RecordStore s(p);
    for (int i = 0; i < 10; ++i) {
      auto r = make(i);
      s.append(r);
    }
  }
  RecordStore s(p);
  EXPECT_EQ(s.size(), 10u);
  EXPECT_EQ(s.torn_bytes_dropped(), 0u);
  auto r = make(99);
  EXPECT_EQ(s.append(r), 11u);
  EXPECT_EQ(check_log(p), 11u);
  EXPECT_EQ(s.since(0)[3].to_json(), [&] {
    auto m = make(3);
    m.seq = 4;
    return m.to_json();
  }());
}

TEST(RecordStore, TornTailDroppedOnRecovery) {
  const auto p = temp_file("torn.jsonl");
  {
    RecordStore s(p);
    for (int i = 0; i < 5; ++i) {
      auto r = make(i);
      s.append(r);
    }
  }
  const auto full = fs::file_size(p);
  const std::string tail = R"({"seq":6,"receive_time":"2024-)";
  {
    std::ofstream out(p, std::ios::app);
    out << tail;
  }
  RecordStore s(p);
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(s.torn_bytes_dropped(), tail.size());
  EXPECT_EQ(fs::file_size(p), full);
  auto r = make(5);
  EXPECT_EQ(s.append(r), 6u);
  EXPECT_EQ(check_log(p), 6u);
}

TEST(RecordStore, SequenceGapInFileRejected) {
  const auto p = temp_file("gap.jsonl");
  {
    std::ofstream out(p);
    auto a = make(1);
    a.seq = 1;
    auto b = make(2);
    b.seq = 3;
    out << a.to_json().dump() << "\n" << b.to_json().dump() << "\n";
  }
  EXPECT_ERRC(RecordStore s(p), Errc::SequenceGap);
}

TEST(RecordStore, KillDuringIngestLeavesGaplessParseableLog) {
  const auto p = temp_file("crash.jsonl");
  std::mt19937_64 rng(17);
  std::uint64_t total = 0;
  for (int round = 0; round < 8; ++round) {
    int ready[2];
    ASSERT_EQ(::pipe(ready), 0);
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      RecordStore s(p, round % 2 ? FsyncPolicy::PerBatch : FsyncPolicy::None);
      auto first = make(0);
      s.append(first);
      const char go = 1;
      if (::write(ready[1], &go, 1) != 1) ::_exit(3);
      for (int i = 1;; ++i) {
        if (i % 5 == 0) {
          std::vector<IngestRecord> batch{make(i), make(i + 1), make(i + 2)};
          s.append(batch);
        } else {
          auto r = make(i);
          s.append(r);
        }
      }
    }
    // Kill only once the child has recovered the log and written at least one record.
    char go = 0;
    ASSERT_EQ(::read(ready[0], &go, 1), 1);
    ::close(ready[0]);
    ::close(ready[1]);
    std::this_thread::sleep_for(std::chrono::milliseconds(5 + rng() % 40));
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFSIGNALED(status));

    RecordStore reopened(p);
    EXPECT_GT(reopened.last_seq(), total);
    total = reopened.last_seq();
    const auto all = reopened.since(0);
    for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i].seq, i + 1);
  }
  EXPECT_EQ(check_log(p), total);
}

TEST(StreamSubscriber, DropsOldestWhenFull) {
  StreamSubscriber sub(3);
  for (int i = 0; i < 5; ++i) {
    auto r = make(i);
    r.seq = std::uint64_t(i + 1);
    sub.push(r);
  }
  EXPECT_EQ(sub.dropped(), 2u);
  EXPECT_EQ(sub.try_pop()->seq, 3u);
  EXPECT_EQ(sub.try_pop()->seq, 4u);
  EXPECT_EQ(sub.try_pop()->seq, 5u);
  EXPECT_FALSE(sub.try_pop().has_value());
}

TEST(StreamSubscriber, PopWakesOnPublishAndClose) {
  StreamHub hub;
  auto sub = hub.subscribe(8);
  EXPECT_EQ(hub.subscribers(), 1u);
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    auto r = make(1);
    r.seq = 42;
    hub.publish(r);
  });
  const auto got = sub->pop(std::chrono::milliseconds(2000));
  t.join();
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->seq, 42u);
  hub.close_all();
  EXPECT_TRUE(sub->closed());
  EXPECT_FALSE(sub->pop(std::chrono::milliseconds(10)).has_value());
  hub.unsubscribe(sub);
  EXPECT_EQ(hub.subscribers(), 0u);
}
