#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace seedsim::kernel {

/// Simulated time as integer microseconds. Event ordering never touches floating point.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1000); }
  static SimTime from_seconds(double s) { return SimTime(static_cast<std::int64_t>(std::llround(s * 1e6))); }
  static constexpr SimTime zero() { return SimTime(0); }
  static constexpr SimTime max() { return SimTime(INT64_MAX); }

  constexpr std::int64_t us() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime other) const { return SimTime(us_ + other.us_); }
  constexpr SimTime operator-(SimTime other) const { return SimTime(us_ - other.us_); }
  constexpr SimTime& operator+=(SimTime other) {
    us_ += other.us_;
    return *this;
  }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

}  // namespace seedsim::kernel
