#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace topoprune {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on uint64.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

} // namespace detail

/// Counter-based generator: the i-th output is a pure function of
/// (seed, stream, i), so independent streams can be drawn for parallel
/// work without any shared state, and results never depend on schedule.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::mix64(seed + detail::kGolden) ^
             detail::mix64((stream + 1) * detail::kGolden)) {}

  std::uint64_t next_u64() {
    counter_ += detail::kGolden;
    return detail::mix64(key_ + counter_);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (lo, hi].
  double uniform(double lo, double hi) {
    return hi - (hi - lo) * uniform01();
  }

  /// Standard normal via Box-Muller; generates pairs, caches the spare.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace topoprune
