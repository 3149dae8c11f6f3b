#pragma once

#include "gibbsgeom/configuration.hpp"
#include "gibbsgeom/potential.hpp"

#include <cstdint>
#include <vector>

namespace gibbsgeom {

/// Mark attached to each generated point (birth-growth times, claim marks).
enum class MarkDist { kNone, kUniform01, kExp1 };

struct SamplerOptions {
  /// Free-boundary mode may explore outside the window while chasing
  /// ancestors; this caps how far. Negative means automatic:
  /// 64 * range + 10 * ln(max(volume, e)).
  double max_padding = -1.0;
  /// Cap on the number of events one acceptance resolution may explore.
  std::size_t max_clan_points = 100000;
  /// Hard cap on the total number of space-time events materialized.
  std::size_t max_events = 2000000;
  /// Permit sampling with admissibility margin >= 1 (may not terminate in
  /// reasonable time; the caps above then abort with ClanOverflow).
  bool allow_near_critical = false;
  MarkDist marks = MarkDist::kNone;
};

/// An exact draw of the thinned process together with the free process it
/// was carved from and per-point ancestor-clan geometry.
struct GibbsSample {
  PointConfiguration config;       // accepted points inside the window
  PointConfiguration free_config;  // all alive-at-zero points (superset)
  /// Diameter of the point's ancestor clan; 0 for points with no ancestors.
  std::vector<double> clan_diameter;
  /// Absolute positions of each accepted point's clan members (empty for
  /// ancestor-free points). Consumed by the truncation indicator.
  std::vector<std::vector<Point>> clan_points;
  double margin = 0.0;
  double padding_used = 0.0;
  std::size_t max_clan_size = 0;
  std::size_t total_events = 0;
};

/// Homogeneous Poisson(tau) on the window. Deterministic given seed.
PointConfiguration sample_poisson(double tau, const Window& window,
                                  std::uint64_t seed,
                                  MarkDist marks = MarkDist::kNone);

/// Exact sample of the Gibbs process on the window by backward dependent
/// thinning of the free birth-death process. Requires margin < 1 unless
/// beta == 0 (no interaction) or options.allow_near_critical.
GibbsSample sample_gibbs(const Potential& pot, double tau, double beta,
                         const Window& window, std::uint64_t seed,
                         const SamplerOptions& options = {});

struct ChainOptions {
  std::size_t n_sweeps = 64;
  std::size_t moves_per_sweep = 0;  // 0: auto from tau * volume + count
};

/// Birth/death Metropolis resample of the inner window conditional on the
/// rest of `full` staying put. Warm-started from full's restriction, which
/// already follows the target law, so every returned state is stationary.
/// Returns the resampled points inside `inner` only.
PointConfiguration sample_conditional(const Potential& pot, double tau,
                                      double beta,
                                      const PointConfiguration& full,
                                      const Window& inner,
                                      const ChainOptions& chain,
                                      std::uint64_t seed);

struct VoidSpec {
  bool gibbs = false;  // false: plain Poisson reference
  Potential pot = Potential::strauss(1.0, 1.0);
  double tau = 1.0;
  double beta = 0.0;
  Window window;
};

struct VoidEstimate {
  double estimate = 0.0;
  double se = 0.0;
  /// Same statistic on the coupled free process (equals the main estimate
  /// for the plain Poisson spec). The thinned process can only have larger
  /// voids, sample by sample.
  double coupled_free = 0.0;
  double coupled_free_se = 0.0;
  std::size_t n_reps = 0;
};

/// Fraction of replications leaving B_radius(center) empty.
VoidEstimate void_probability(const VoidSpec& spec, const Point& center,
                              double radius, std::size_t n_reps,
                              std::uint64_t seed,
                              const SamplerOptions& options = {});

}  // namespace gibbsgeom
