#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fpp {

// Counter-based pseudo-random primitives.
//
// Every random quantity in the library is a pure function of (seed, counter).
// This is what makes sampling reproducible regardless of evaluation order:
// layers of an environment, samples of a batch, and trials of a Monte Carlo
// estimate can be generated in any order, or concurrently, and still produce
// identical output.

// 64-bit finalizer (splitmix64 increment + avalanche).  Good enough to
// decorrelate structured counter inputs such as (seed, layer-index).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combines a seed with one or more stream identifiers into a new seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a));
}
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(seed, a, b), c);
}

// Deterministic stream of uniforms/variates addressed by (key, counter).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  // Raw 64 random bits for counter position `counter_`.
  std::uint64_t next_bits() { return mix64(key_ ^ mix64(counter_++)); }

  // Uniform on [0, 1) with 53 significant bits.
  double next_uniform() {
    return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // Standard exponential via inversion.  next_uniform() < 1, so the log
  // argument is in (0, 1] and the result is finite and >= 0.
  double next_exponential() { return -std::log(1.0 - next_uniform()); }

  // Exact Poisson(mean) sample: counts unit-rate exponential arrivals until
  // their sum exceeds `mean`.  O(mean) draws, no underflow for large means
  // (unlike the textbook product-of-uniforms method).
  std::int64_t next_poisson(double mean) {
    std::int64_t k = 0;
    double acc = next_exponential();
    while (acc <= mean) {
      ++k;
      acc += next_exponential();
    }
    return k;
  }

  // Uniform point in the closed d-ball of radius r around `center`,
  // by rejection from the bounding cube.
  std::vector<double> next_in_ball(const std::vector<double>& center, double r) {
    const std::size_t d = center.size();
    std::vector<double> p(d);
    for (;;) {
      double norm2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = next_uniform(-r, r);
        norm2 += p[i] * p[i];
      }
      if (norm2 <= r * r) break;
    }
    for (std::size_t i = 0; i < d; ++i) p[i] += center[i];
    return p;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace fpp
