#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seedsim::ground {

enum class Channel { Rxsm, Iridium, LoraTest };
const char* to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view name);

struct IngestRecord {
  std::uint64_t seq = 0;
  std::string receive_time;
  Channel channel = Channel::Rxsm;
  std::string origin;
  std::string message;
  nlohmann::json fields = nlohmann::json::object();
  std::string raw;
  std::optional<std::string> error;  // set for quarantine records

  bool quarantined() const { return error.has_value(); }
  nlohmann::json to_json() const;
  static IngestRecord from_json(const nlohmann::json& j);
};

enum class FsyncPolicy { None, PerBatch };

/// Append-only NDJSON log with a gapless sequence counter starting at 1.
/// Reopening an existing file drops a torn final line and continues numbering.
class RecordStore {
 public:
  explicit RecordStore(std::optional<std::filesystem::path> path = std::nullopt,
                       FsyncPolicy policy = FsyncPolicy::PerBatch);
  ~RecordStore();
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  /// Assigns sequence numbers, writes, and syncs once for the batch.
  std::vector<std::uint64_t> append(std::vector<IngestRecord>& batch);
  std::uint64_t append(IngestRecord& record);

  std::vector<IngestRecord> since(std::uint64_t seq, std::size_t limit = SIZE_MAX) const;
  std::uint64_t last_seq() const;
  std::size_t size() const;
  std::size_t torn_bytes_dropped() const { return torn_dropped_; }
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  void recover();

  std::optional<std::filesystem::path> path_;
  FsyncPolicy policy_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<IngestRecord> records_;
  std::uint64_t next_seq_ = 1;
  std::size_t torn_dropped_ = 0;
};

/// One subscriber's bounded queue; the oldest entry is dropped when full so publishers never block.
class StreamSubscriber {
 public:
  explicit StreamSubscriber(std::size_t capacity) : capacity_(capacity) {}

  void push(const IngestRecord& r);
  std::optional<IngestRecord> pop(std::chrono::milliseconds timeout);
  std::optional<IngestRecord> try_pop();
  void close();
  bool closed() const;
  std::uint64_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<IngestRecord> queue_;
  std::size_t capacity_;
  bool closed_ = false;
  std::uint64_t dropped_ = 0;
};

class StreamHub {
 public:
  std::shared_ptr<StreamSubscriber> subscribe(std::size_t capacity = 1024);
  void unsubscribe(const std::shared_ptr<StreamSubscriber>& s);
  void publish(const IngestRecord& r);
  void close_all();
  std::size_t subscribers() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<StreamSubscriber>> subs_;
};

}  // namespace seedsim::ground
