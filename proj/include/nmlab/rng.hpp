#pragma once

#include <cstdint>

namespace nmlab {

/// SplitMix64. State advances by 0x9E3779B97F4A7C15; output mix uses
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB with shifts 30, 27, 31.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Seed for trial `trial` of table cell `cell`; independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t trial) {
  std::uint64_t s = SplitMix64::mix(base + 0x9E3779B97F4A7C15ull);
  s = SplitMix64::mix(s ^ (cell + 0x632BE59BD9B4E019ull));
  return SplitMix64::mix(s ^ (trial + 0x2545F4914F6CDD1Dull));
}

}  // namespace nmlab
