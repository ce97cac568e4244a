#include "seedsim/ground/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::ground {

using nlohmann::json;

const char* to_string(Channel c) {
  switch (c) {
    case Channel::Rxsm: return "rxsm";
    case Channel::Iridium: return "iridium";
    case Channel::LoraTest: return "lora-test";
  }
  return "?";
}

std::optional<Channel> channel_from_string(std::string_view name) {
  for (Channel c : {Channel::Rxsm, Channel::Iridium, Channel::LoraTest}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

json IngestRecord::to_json() const {
  json j{{"seq", seq},         {"receive_time", receive_time}, {"channel", to_string(channel)},
         {"origin", origin},   {"message", message},           {"fields", fields},
         {"raw", raw}};
  if (error) j["error"] = *error;
  return j;
}

IngestRecord IngestRecord::from_json(const json& j) {
  IngestRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.receive_time = j.at("receive_time").get<std::string>();
  const auto ch = channel_from_string(j.at("channel").get<std::string>());
  if (!ch) throw Error(Errc::CorruptRecord, "unknown channel in store");
  r.channel = *ch;
  r.origin = j.at("origin").get<std::string>();
  r.message = j.at("message").get<std::string>();
  r.fields = j.at("fields");
  r.raw = j.at("raw").get<std::string>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

RecordStore::RecordStore(std::optional<std::filesystem::path> path, FsyncPolicy policy)
    : path_(std::move(path)), policy_(policy) {
  if (path_) recover();
}

RecordStore::~RecordStore() {
  if (fd_ >= 0) ::close(fd_);
}

void RecordStore::recover() {
  std::string content;
  if (std::filesystem::exists(*path_)) {
    std::ifstream in(*path_, std::ios::binary);
    content.assign(std::istreambuf_iterator<char>(in), {});
  }
  std::size_t good = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string line = content.substr(pos, nl - pos);
    IngestRecord r;
    try {
      r = IngestRecord::from_json(json::parse(line));
    } catch (const std::exception&) {
      break;  // a partial write followed by garbage; everything after is dropped
    }
    if (r.seq != next_seq_) {
      throw Error(Errc::SequenceGap, fmt::format("store sequence {} where {} expected", r.seq, next_seq_));
    }
    ++next_seq_;
    records_.push_back(std::move(r));
    pos = nl + 1;
    good = pos;
  }
  torn_dropped_ = content.size() - good;
  if (torn_dropped_ > 0) std::filesystem::resize_file(*path_, good);

  fd_ = ::open(path_->c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(Errc::NotFound, fmt::format("cannot open store {}: {}", path_->string(), std::strerror(errno)));
}

std::vector<std::uint64_t> RecordStore::append(std::vector<IngestRecord>& batch) {
  std::lock_guard lock(mu_);
  std::vector<std::uint64_t> seqs;
  std::string buffer;
  for (auto& r : batch) {
    r.seq = next_seq_++;
    seqs.push_back(r.seq);
    if (fd_ >= 0) {
      buffer += r.to_json().dump();
      buffer += '\n';
    }
  }
  if (fd_ >= 0 && !buffer.empty()) {
    const char* p = buffer.data();
    std::size_t left = buffer.size();
    while (left > 0) {
      const ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(Errc::NotFound, fmt::format("store write failed: {}", std::strerror(errno)));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (policy_ == FsyncPolicy::PerBatch) ::fsync(fd_);
  }
  for (auto& r : batch) records_.push_back(r);
  return seqs;
}

std::uint64_t RecordStore::append(IngestRecord& record) {
  std::vector<IngestRecord> batch{record};
  const auto seqs = append(batch);
  record.seq = seqs.front();
  return record.seq;
}

std::vector<IngestRecord> RecordStore::since(std::uint64_t seq, std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<IngestRecord> out;
  // records_[i].seq == i + 1
  for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(seq, records_.size()));
       i < records_.size() && out.size() < limit; ++i) {
    out.push_back(records_[i]);
  }
  return out;
}

std::uint64_t RecordStore::last_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

std::size_t RecordStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void StreamSubscriber::push(const IngestRecord& r) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(r);
  }
  cv_.notify_one();
}

std::optional<IngestRecord> StreamSubscriber::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  IngestRecord r = std::move(queue_.front());
  queue_.pop_front();
  return r;
}

std::optional<IngestRecord> StreamSubscriber::try_pop() { return pop(std::chrono::milliseconds(0)); }

void StreamSubscriber::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool StreamSubscriber::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::uint64_t StreamSubscriber::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::shared_ptr<StreamSubscriber> StreamHub::subscribe(std::size_t capacity) {
  auto s = std::make_shared<StreamSubscriber>(capacity);
  std::lock_guard lock(mu_);
  subs_.push_back(s);
  return s;
}

void StreamHub::unsubscribe(const std::shared_ptr<StreamSubscriber>& s) {
  std::lock_guard lock(mu_);
  std::erase(subs_, s);
  s->close();
}

void StreamHub::publish(const IngestRecord& r) {
  std::vector<std::shared_ptr<StreamSubscriber>> copy;
  {
    std::lock_guard lock(mu_);
    copy = subs_;
  }
  for (auto& s : copy) s->push(r);
}

void StreamHub::close_all() {
  std::lock_guard lock(mu_);
  for (auto& s : subs_) s->close();
  subs_.clear();
}

std::size_t StreamHub::subscribers() const {
  std::lock_guard lock(mu_);
  return subs_.size();
}

}  // namespace seedsim::ground
