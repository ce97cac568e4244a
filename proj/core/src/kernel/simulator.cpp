#include "seedsim/kernel/simulator.hpp"

#include <sodium.h>

#include <algorithm>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::kernel {

struct EventTrace::HashState {
  crypto_hash_sha256_state state;
};

EventTrace::EventTrace() : hash_(std::make_unique<HashState>()) {
  crypto_hash_sha256_init(&hash_->state);
}
EventTrace::~EventTrace() = default;
EventTrace::EventTrace(EventTrace&&) noexcept = default;
EventTrace& EventTrace::operator=(EventTrace&&) noexcept = default;

void EventTrace::set_stream(std::ostream* out) {
  stream_ = out;
}

std::string EventTrace::canonical_line(const TraceEntry& e) {
  return fmt::format("{},{},{},{},{}\n", e.time.us(), e.sequence, e.target, e.kind, e.detail);
}

void EventTrace::append(TraceEntry entry) {
  const std::string line = canonical_line(entry);
  crypto_hash_sha256_update(&hash_->state, reinterpret_cast<const unsigned char*>(line.data()),
                            line.size());
  if (stream_ != nullptr) *stream_ << line;
  ++count_;
  if (keep_entries_) entries_.push_back(std::move(entry));
}

std::string EventTrace::digest() const {
  crypto_hash_sha256_state copy = hash_->state;
  unsigned char out[crypto_hash_sha256_BYTES];
  crypto_hash_sha256_final(&copy, out);
  std::string hex;
  for (unsigned char b : out) hex += fmt::format("{:02x}", b);
  return hex;
}

bool EventTrace::ordered() const {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const auto& a = entries_[i - 1];
    const auto& b = entries_[i];
    if (b.time < a.time || (b.time == a.time && b.sequence <= a.sequence)) return false;
  }
  return true;
}

Simulator::Simulator(std::uint64_t seed) : seed_(seed) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
}

std::uint64_t Simulator::schedule(SimTime time, EventTarget target, std::string kind,
                                  std::function<void()> body) {
  if (time < now_) {
    throw Error(Errc::PastEvent,
                fmt::format("event '{}' at {} us scheduled while now = {} us", kind, time.us(), now_.us()));
  }
  const std::uint64_t sequence = next_sequence_++;
  heap_.push_back(SimEvent{time, sequence, std::move(target), std::move(kind), std::move(body)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return sequence;
}

const EventTrace& Simulator::run_until(SimTime t_end) {
  while (!heap_.empty() && heap_.front().time <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    SimEvent event = std::move(heap_.back());
    heap_.pop_back();
    now_ = event.time;
    TraceEntry entry{event.time, event.sequence, target_name(event.target), std::move(event.kind), {}};
    current_detail_ = &entry.detail;
    if (event.body) event.body();
    current_detail_ = nullptr;
    trace_.append(std::move(entry));
  }
  if (now_ < t_end) now_ = t_end;
  return trace_;
}

void Simulator::note(const std::string& text) {
  if (current_detail_ == nullptr) return;
  if (!current_detail_->empty()) current_detail_->push_back(';');
  current_detail_->append(text);
}

LinkId Simulator::register_link(const std::string& name) {
  if (find_link(name)) throw Error(Errc::ScenarioError, "duplicate link " + name);
  link_names_.push_back(name);
  return LinkId{static_cast<std::uint16_t>(link_names_.size() - 1)};
}

const std::string& Simulator::link_name(LinkId id) const { return link_names_.at(id.value); }

std::optional<LinkId> Simulator::find_link(const std::string& name) const {
  for (std::size_t i = 0; i < link_names_.size(); ++i) {
    if (link_names_[i] == name) return LinkId{static_cast<std::uint16_t>(i)};
  }
  return std::nullopt;
}

std::string Simulator::target_name(const EventTarget& target) const {
  if (const auto* node = std::get_if<NodeId>(&target)) return node->name();
  const auto id = std::get<LinkId>(target);
  if (id.value < link_names_.size()) return "link:" + link_names_[id.value];
  return "link:" + std::to_string(id.value);
}

}  // namespace seedsim::kernel
