#pragma once

#include <cstdint>

namespace sramm {

/// SplitMix64 finalizer; used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of sub-stream `stream` under `seed`. Every randomized routine draws
/// column j (or trial t) from derive_seed(seed, j) so that generation order
/// and thread count never change the realized values.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator with Box-Muller normals. Portable and bit-exact
/// across platforms for the integer and uniform outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// +1 or -1 with equal probability.
  double sign();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sramm
