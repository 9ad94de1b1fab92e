#ifndef SELSEG_RNG_HPP_
#define SELSEG_RNG_HPP_

// Portable seeded randomness. std::mt19937_64 has a fully specified output
// sequence; the distributions below are written out by hand because the
// standard library ones differ between implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace selseg {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n), by rejection of the biased tail.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) return 0;
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t const limit = kMax - kMax % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal by the Box-Muller transform (cosine branch only).
  double normal() {
    double const u1 = 1.0 - uniform01();  // (0, 1]
    double const u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace selseg

#endif  // SELSEG_RNG_HPP_
