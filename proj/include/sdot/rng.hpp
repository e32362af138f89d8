#pragma once

#include <cmath>
#include <cstdint>

namespace sdot {

// Counter-based generator: the k-th draw of stream (seed, stream_id) is a pure
// function of (seed, stream_id, k), so any subsequence can be regenerated
// independently of evaluation order. The mixer is splitmix64 (Steele et al.);
// constants are documented in the README for cross-implementation replay.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : base_(mix(seed ^ (0x9E3779B97F4A7C15ull * (stream_id + 1)))), counter_(0) {}

  std::uint64_t next_u64() { return mix(base_ + 0x9E3779B97F4A7C15ull * (++counter_)); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller (two uniforms per call, no caching so the
  // draw count stays a pure function of the call count).
  double next_gaussian();

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_;
};

inline double CounterRng::next_gaussian() {
  // Guard u1 away from 0 so the log is finite.
  double u1 = next_double();
  const double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace sdot
