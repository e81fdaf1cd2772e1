#pragma once

#include <cstdint>

namespace debunc {

// Deterministic pseudo-random source used everywhere randomness is needed.
// SplitMix64 is fully specified by its seed, has no platform-dependent state,
// and supports cheap keyed derivation of independent substreams, which keeps
// experiment runs bit-reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Derives an independent generator keyed on (current seed, stream id).
  Rng fork(std::uint64_t stream) const {
    return Rng(mix(state_, 0xD6E8FEB86659FD93ULL ^ stream));
  }

  /// Stateless key derivation: folds `key` into `seed` through the SplitMix64
  /// finalizer. Used for counter-based generation (weights, per-task seeds).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (key + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace debunc
