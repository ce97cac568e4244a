#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "seedsim/kernel/node.hpp"
#include "seedsim/kernel/rng.hpp"
#include "seedsim/kernel/time.hpp"

namespace seedsim::kernel {

using EventTarget = std::variant<NodeId, LinkId>;

struct SimEvent {
  SimTime time;
  std::uint64_t sequence = 0;
  EventTarget target;
  std::string kind;
  std::function<void()> body;
};

struct TraceEntry {
  SimTime time;
  std::uint64_t sequence = 0;
  std::string target;
  std::string kind;
  std::string detail;
};

/// Ordered record of executed events. The SHA-256 digest always covers every entry;
/// entries are kept in memory only when requested, and can be streamed as CSV.
class EventTrace {
 public:
  EventTrace();
  ~EventTrace();
  EventTrace(EventTrace&&) noexcept;
  EventTrace& operator=(EventTrace&&) noexcept;

  void set_keep_entries(bool keep) { keep_entries_ = keep; }
  void set_stream(std::ostream* out);

  void append(TraceEntry entry);

  const std::vector<TraceEntry>& entries() const { return entries_; }
  std::uint64_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Hex SHA-256 over the canonical line form of every entry so far.
  std::string digest() const;
  /// True when the kept entries are in (time, sequence) order.
  bool ordered() const;

  static std::string canonical_line(const TraceEntry& entry);

 private:
  struct HashState;
  std::unique_ptr<HashState> hash_;
  std::vector<TraceEntry> entries_;
  std::uint64_t count_ = 0;
  bool keep_entries_ = true;
  std::ostream* stream_ = nullptr;
};

class Simulator {
 public:
  explicit Simulator(std::uint64_t seed = 0);

  SimTime now() const { return now_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws Errc::PastEvent when time < now(). Returns the assigned sequence number.
  std::uint64_t schedule(SimTime time, EventTarget target, std::string kind, std::function<void()> body);
  std::uint64_t schedule_in(SimTime delay, EventTarget target, std::string kind, std::function<void()> body) {
    return schedule(now_ + delay, std::move(target), std::move(kind), std::move(body));
  }

  /// Executes every event with time <= t_end in (time, sequence) order.
  const EventTrace& run_until(SimTime t_end);

  /// Appends text to the detail column of the currently executing event.
  void note(const std::string& text);

  std::size_t pending() const { return heap_.size(); }
  EventTrace& trace() { return trace_; }
  const EventTrace& trace() const { return trace_; }

  NodeRegistry& nodes() { return nodes_; }
  const NodeRegistry& nodes() const { return nodes_; }

  LinkId register_link(const std::string& name);
  const std::string& link_name(LinkId id) const;
  std::optional<LinkId> find_link(const std::string& name) const;

  RngStream rng(std::string_view stream_id) const { return RngStream(seed_, stream_id); }

  std::string target_name(const EventTarget& target) const;

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::uint64_t seed_;
  SimTime now_;
  std::uint64_t next_sequence_ = 0;
  std::vector<SimEvent> heap_;
  EventTrace trace_;
  NodeRegistry nodes_;
  std::vector<std::string> link_names_;
  std::string* current_detail_ = nullptr;
};

}  // namespace seedsim::kernel
