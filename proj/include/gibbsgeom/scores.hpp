#pragma once

#include "gibbsgeom/configuration.hpp"
#include "gibbsgeom/sampler.hpp"

#include <cstdint>
#include <vector>

namespace gibbsgeom {

enum class ScoreKind {
  kConstant,
  kClique,
  kKnnLength,
  kVoronoiLength,
  kMaximalPoint,
  kBirthGrowth,
  kInsuranceClaim,
};

/// The region under a decreasing affine graph over D = [0,1]^{d-1}:
/// A = {(v, w) : v in D, 0 <= w <= F(v)} with F(v) = offset + slope*mean(v).
/// The default is F(v) = 1 - mean(v)/2.
struct RegionA {
  double offset = 1.0;
  double slope = -0.5;
};

/// Validated constructor; slope must be negative, bounded away from 0 and
/// -infinity, and F must stay in [0, 1] over D.
RegionA region_a(double offset, double slope);

struct ScoreSpec {
  ScoreKind kind = ScoreKind::kConstant;
  double value = 1.0;          // Constant
  int k = 1;                   // Clique / KnnLength / InsuranceClaim
  double s = 1.0;              // Clique distance threshold
  RegionA region;              // MaximalPoint boundary function
  double region_lambda = 1.0;  // MaximalPoint scale: region_lambda^{1/d} A
  double speed = 1.0;          // BirthGrowth
  double cap = 1.0;            // InsuranceClaim

  bool needs_marks() const {
    return kind == ScoreKind::kBirthGrowth || kind == ScoreKind::kInsuranceClaim;
  }

  static ScoreSpec constant(double value);
  static ScoreSpec clique(int k, double s);
  static ScoreSpec knn_length(int k);
  static ScoreSpec voronoi_length();
  static ScoreSpec maximal(const RegionA& region, double region_lambda);
  static ScoreSpec birth_growth(double speed);
  static ScoreSpec insurance(int k, double cap);
};

struct ScoreResult {
  double value = 0.0;
  /// Stabilization radius actually certified: inserting any point farther
  /// than this from x cannot change the value.
  double radius = 0.0;
  /// Set by the clan-truncation path when the point was excluded.
  bool truncated_out = false;
};

/// Score of x against a configuration NOT containing x (the score itself is
/// evaluated with x present). mark_x carries x's time for the marked
/// variants and is ignored otherwise. Reference implementation: plain scans,
/// no shared state.
ScoreResult score_point(const ScoreSpec& spec, const Point& x, double mark_x,
                        const PointConfiguration& rest);

/// Per-point scores of every configuration point against the others.
/// Index-accelerated where it matters; agrees with score_point exactly.
/// MaximalPoint scores points outside the region as {0, 0}.
std::vector<ScoreResult> score_all(const ScoreSpec& spec,
                                   const PointConfiguration& config);

/// Integer clique total: the number of (k+1)-cliques of the distance graph
/// at threshold s. Equals (k+1) * total clique score, without division.
std::uint64_t clique_total_count(int k, double s,
                                 const PointConfiguration& config);

/// Sum of per-point scores over points inside `window` (MaximalPoint: over
/// points inside the scaled region instead), accumulated in point order.
double total_score(const ScoreSpec& spec, const PointConfiguration& config,
                   const Window& window);

/// Sum restricted to points whose composed ancestor-clan diameter is at
/// most rho. The composed diameter unions the point's own clan with the
/// clans of configuration points inside its stabilization ball; a point
/// with an empty union counts as diameter 0 and always contributes.
double truncated_total(const ScoreSpec& spec, const GibbsSample& sample,
                       double rho);

/// Composed clan diameter per point, as used by truncated_total.
std::vector<double> composed_clan_diameters(const ScoreSpec& spec,
                                            const GibbsSample& sample);

/// Per-point scores with truncated_out set on points whose composed clan
/// diameter exceeds rho. truncated_total sums the surviving values.
std::vector<ScoreResult> truncated_score_all(const ScoreSpec& spec,
                                             const GibbsSample& sample,
                                             double rho);

/// True if x lies in the scaled region region_lambda^{1/d} A.
bool in_region(const RegionA& region, double region_lambda, const Point& x);

}  // namespace gibbsgeom
