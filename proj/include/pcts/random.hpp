#pragma once

// Deterministic random streams. Every generator and particle reservoir
// draws from Rng, whose output depends only on (seed, stream) and never on
// the standard library's distribution implementations.

#include <cstdint>
#include <random>

#include "pcts/special.hpp"

namespace pcts {

/// SplitMix64 finaliser; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of `seed` (replicates, chains, particles).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  long poisson(double lambda) { return poisson_quantile(lambda, uniform()); }

  /// Binomial(n, p) as a sum of n Bernoulli trials (binomial thinning).
  long thin(long n, double p) {
    long s = 0;
    for (long i = 0; i < n; ++i) s += bernoulli(p) ? 1 : 0;
    return s;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pcts
