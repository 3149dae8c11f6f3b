#include "gibbsgeom/numerics.hpp"
#include "gibbsgeom/rng.hpp"

#include <cmath>

namespace gibbsgeom {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  return derive_seed(derive_seed(seed, a, b), c);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    s = z ^ (z >> 31);
  }
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::exponential() {
  // 1 - U in (0, 1], so the log never sees zero.
  return -std::log(1.0 - uniform());
}

double Rng::exponential(double rate) { return exponential() / rate; }

double Rng::gaussian() {
  // uniform() lies in [0, 1); shift into (0, 1) for the quantile.
  double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  return norm_quantile(u);
}

long Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  long total = 0;
  // Keep chunk means small enough that exp(-chunk) stays well away from
  // the underflow threshold.
  while (mean > 32.0) {
    double half = mean * 0.5;
    total += poisson(half);
    mean -= half;
  }
  const double p0 = std::exp(-mean);
  double prod = uniform();
  long k = 0;
  while (prod > p0) {
    prod *= uniform();
    ++k;
  }
  return total + k;
}

long Rng::uniform_index(long n) {
  if (n <= 1) return 0;
  // Rejection-free enough at these scales; modulo bias is far below any
  // statistical resolution used here, but use the standard trick anyway.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return static_cast<long>(r % bound);
}

}  // namespace gibbsgeom
