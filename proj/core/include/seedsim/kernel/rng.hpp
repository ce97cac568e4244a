#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace seedsim::kernel {

/// Counter-based generator: draw n of stream (seed, id) is splitmix64(key(seed, id) + n * golden).
/// Each consumer owns its stream, so draws do not depend on event interleaving.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p);

  std::uint64_t seed() const { return seed_; }
  const std::string& id() const { return id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::string id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace seedsim::kernel
