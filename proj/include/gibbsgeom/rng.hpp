#pragma once

#include <cstdint>

namespace gibbsgeom {

/// SplitMix64 avalanche step; used both as a seed expander and as the key
/// mixer for derived streams.
std::uint64_t mix64(std::uint64_t x);

/// Combine a seed with stream labels into a new seed. Order matters.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

/// xoshiro256++ with SplitMix64 state expansion. Small enough to keep one
/// instance per spatial cell; the same build produces the same stream on
/// every platform we target, which the replication contract relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Unit-rate exponential, strictly positive.
  double exponential();

  /// Exponential with the given rate.
  double exponential(double rate);

  /// Standard normal via inverse-CDF transform (deterministic, no state
  /// beyond one uniform).
  double gaussian();

  /// Exact Poisson draw. Large means are split into subcritical chunks so
  /// plain inversion never underflows.
  long poisson(double mean);

  /// Uniform integer in [0, n).
  long uniform_index(long n);

 private:
  std::uint64_t s_[4];
};

}  // namespace gibbsgeom
