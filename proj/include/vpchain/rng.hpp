#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace vpchain {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seeded random source with platform-independent variate generation.
///
/// The standard library distributions are implementation-defined, so all
/// variates are produced here from raw mt19937_64 output. Identical seeds
/// give bit-identical streams on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream `index` of master seed `seed`. Streams with different
  /// (seed, tag, index) triples are statistically independent.
  static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index));
  }
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return stream(seed, 0, index); }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe as a log argument.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    return r * std::cos(kTwoPi * uniform());
  }

  /// Exponential with the given rate, by inverse transform.
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  /// Number of Bernoulli(p) trials up to and including the first success,
  /// by inverse transform. Returned as double since it can exceed 2^64 for
  /// tiny p.
  double geometric(double p) {
    if (p >= 1.0) return 1.0;
    return std::max(1.0, std::ceil(std::log(uniform_open()) / std::log1p(-p)));
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vpchain
