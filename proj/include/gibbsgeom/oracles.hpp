#pragma once

#include "gibbsgeom/configuration.hpp"
#include "gibbsgeom/scores.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gibbsgeom {

/// Brute-force reference implementations, deliberately written against the
/// definitions rather than the production data structures. The library
/// proper never calls these; tests and the oracle-check command do.

std::vector<std::size_t> naive_neighbors(const PointConfiguration& config,
                                         const Point& x, double r,
                                         long exclude = -1);

double naive_kth_nearest(const PointConfiguration& config, const Point& x,
                         int k, long exclude = -1);

/// Count of (k+1)-subsets with all pairwise distances <= s, by full subset
/// enumeration. Intended for n <= 20.
std::uint64_t brute_clique_count(const PointConfiguration& config, int k,
                                 double s);

/// Per-point maximal indicator by O(n^2) domination scan; -1 for points
/// outside the scaled region.
std::vector<int> brute_maximal(const PointConfiguration& config,
                               const RegionA& region, double region_lambda);

/// Sequential growth: sort seeds by time, accept a seed iff it is not within
/// speed * (t - t') of any previously accepted seed.
std::vector<int> sequential_birth_growth(const PointConfiguration& config,
                                         double speed);

/// Total edge length of the periodic Voronoi tessellation, built
/// independently by clipping each bisector line against all other bisectors
/// (1-D interval arithmetic). image_shells lattice images are enumerated per
/// axis. d = 2 only.
double torus_tessellation_length(const PointConfiguration& config,
                                 int image_shells);

/// Kolmogorov distance to the standard normal via O(n^2) counting.
double brute_kolmogorov(const std::vector<double>& values);

/// Total undirected kNN graph edge length, each edge counted once.
double independent_knn_total(const PointConfiguration& config, int k);

/// Chi-squared goodness-of-fit p-value for iid Poisson(mean) counts, with
/// bins merged so every expected count is at least 5.
double poisson_gof_pvalue(const std::vector<long>& counts, double mean);

struct OracleRow {
  std::string suite;
  long cases = 0;
  long failures = 0;
  double max_err = 0.0;
};

/// Runs every oracle suite on freshly generated random inputs.
std::vector<OracleRow> run_oracle_suites(std::uint64_t seed);

}  // namespace gibbsgeom
