#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/oracles.hpp"
#include "gibbsgeom/rng.hpp"
#include "gibbsgeom/stats.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

using namespace gibbsgeom;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent closed forms for the k=1 clique score on a free Poisson(tau)
// process in the plane, threshold s. With m := tau * pi * s^2:
//   E xi(0)           = m / 2
//   E xi(0)^2         = (m + m^2) / 4
//   cov density c(0,y)= -(tau * lens(|y|) + (2m+1) 1{|y|<=s}) / 4
//   sigma^2           = m/2 + m^2
// lens(t) is the intersection area of two s-discs at center distance t.
double lens_area(double t, double s) {
  if (t >= 2.0 * s) return 0.0;
  return 2.0 * s * s * std::acos(t / (2.0 * s)) -
         0.5 * t * std::sqrt(4.0 * s * s - t * t);
}

ExperimentSpec base_spec() {
  ExperimentSpec spec;
  spec.dim = 2;
  spec.pot = Potential::strauss(1.0, 1.0);
  spec.tau = 0.5;
  spec.beta = 0.0;
  spec.score = ScoreSpec::constant(1.0);
  spec.seed = 424242;
  return spec;
}

bool records_equal(const SummaryRecord& a, const SummaryRecord& b) {
  return a.lambda == b.lambda && a.n_reps == b.n_reps && a.mean_w == b.mean_w &&
         a.var_w == b.var_w && a.var_se == b.var_se &&
         a.var_over_lambda == b.var_over_lambda && a.d_k == b.d_k &&
         a.mismatch == b.mismatch && a.rho == b.rho && a.ok == b.ok &&
         a.note == b.note;
}

}  // namespace

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 4, [&](long i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);

  CHECK_THROWS_AS(
      parallel_for(100, 4,
                   [&](long i) {
                     if (i == 37) throw DomainError("boom");
                   }),
      DomainError);
}

TEST_CASE("kolmogorov distance on a designed staircase") {
  for (long n : {10L, 100L, 1000L}) {
    std::vector<double> v(n);
    for (long i = 0; i < n; ++i)
      v[size_t(i)] = norm_quantile((double(i) + 0.5) / double(n));
    CHECK(kolmogorov_distance(v) ==
          doctest::Approx(0.5 / double(n)).epsilon(1e-6));
  }
  std::vector<double> one{0.0};
  CHECK(kolmogorov_distance(one) == doctest::Approx(0.5));
  CHECK_THROWS_AS(kolmogorov_distance({}), InvalidParams);
  CHECK_THROWS_AS(kolmogorov_distance({2.0, 2.0, 2.0}), DegenerateVariance);
}

TEST_CASE("kolmogorov distance equals the counting oracle, ties included") {
  Rng r(515);
  for (int trial = 0; trial < 200; ++trial) {
    long n = 1 + long(r.uniform_index(60));
    std::vector<double> v(n);
    for (auto& x : v) x = r.gaussian();
    if (trial % 2 == 0) {
      // Force ties by coarse rounding.
      for (auto& x : v) x = std::round(x * 4.0) / 4.0;
      bool constant = true;
      for (double x : v)
        if (x != v[0]) constant = false;
      if (constant && n >= 2) continue;
    }
    CHECK(kolmogorov_distance(v) == doctest::Approx(brute_kolmogorov(v)).epsilon(1e-13));
  }
}

TEST_CASE("kolmogorov distance of a large normal sample is small") {
  Rng r(616);
  std::vector<double> v(10000);
  for (auto& x : v) x = r.gaussian();
  CHECK(kolmogorov_distance(v) < 0.03);
}

TEST_CASE("standardize") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 10.0};
  auto z = standardize(v);
  CHECK(mean_of(z) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(variance_of(z) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(standardize({3.0, 3.0}), DegenerateVariance);
}

TEST_CASE("replicates are deterministic functions of (spec, level, rep)") {
  auto spec = base_spec();
  spec.lambdas = {100.0};
  auto a = experiment_replicate(spec, 0, 7);
  auto b = experiment_replicate(spec, 0, 7);
  REQUIRE(a.config.size() == b.config.size());
  for (std::size_t i = 0; i < a.config.size(); ++i)
    CHECK(a.config.points[i] == b.config.points[i]);
  auto c = experiment_replicate(spec, 0, 8);
  bool same = a.config.size() == c.config.size();
  CHECK((!same || a.config.size() == 0 ||
         !(a.config.points[0] == c.config.points[0])));
}

TEST_CASE("variance scan of the free count matches poisson theory") {
  auto spec = base_spec();
  spec.lambdas = {100.0, 400.0};
  spec.n_reps = 300;
  auto recs = variance_scan(spec);
  REQUIRE(recs.size() == 2);
  for (const auto& rec : recs) {
    CHECK(rec.ok);
    CHECK(rec.n_reps == 300);
    // Count of a Poisson(tau) process: Var W / lambda = tau.
    CHECK(std::fabs(rec.var_over_lambda - 0.5) <= 3.0 * rec.var_se / rec.lambda);
    CHECK(std::fabs(rec.mean_w - 0.5 * rec.lambda) <=
          3.0 * std::sqrt(0.5 * rec.lambda / rec.n_reps));
    CHECK(rec.d_k < 0.1);
    CHECK(rec.mismatch == 0.0);
    CHECK(rec.rho == 0.0);  // beta = 0: truncation exact at rho = 0
  }
  // The calibration note lands on the first record.
  CHECK(recs[0].note.find("exact") != std::string::npos);
}

TEST_CASE("variance scan is invariant in the worker count") {
  auto spec = base_spec();
  spec.pot = Potential::strauss(1.0, 1.0);
  spec.tau = 0.05;
  spec.beta = 1.0;
  spec.score = ScoreSpec::clique(1, 0.7);
  spec.lambdas = {50.0, 100.0};
  spec.n_reps = 60;
  spec.n_threads = 1;
  auto a = variance_scan(spec);
  spec.n_threads = 4;
  auto b = variance_scan(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(records_equal(a[i], b[i]));
  for (const auto& rec : a) {
    CHECK(rec.ok);
    CHECK(rec.rho > 0.0);  // calibrated rho rule active at beta > 0
  }
}

TEST_CASE("variance scan flags degenerate replicates instead of dying") {
  auto spec = base_spec();
  spec.score = ScoreSpec::constant(0.0);
  spec.lambdas = {50.0};
  spec.n_reps = 100;
  auto recs = variance_scan(spec);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].ok);
  CHECK(recs[0].var_w == 0.0);
  CHECK(recs[0].d_k == 0.5);
  CHECK(recs[0].note.find("degenerate") != std::string::npos);
}

TEST_CASE("clt scan basics and guard rails") {
  auto spec = base_spec();
  spec.lambdas = {50.0, 200.0};
  spec.n_reps = 150;
  auto res = clt_scan(spec);
  REQUIRE(res.points.size() == 2);
  for (const auto& pt : res.points) {
    CHECK(pt.n_reps == 150);
    CHECK(pt.d_k > 0.0);
    CHECK(pt.d_k < 0.2);
    CHECK(pt.d_k_se > 0.0);
  }

  spec.n_reps = 99;
  CHECK_THROWS_AS(clt_scan(spec), InvalidParams);

  spec.n_reps = 150;
  spec.score = ScoreSpec::constant(0.0);
  CHECK_THROWS_AS(clt_scan(spec), DegenerateVariance);
}

TEST_CASE("point correlation of the trivial score is exact") {
  auto spec = base_spec();
  spec.n_point = 500;
  auto est = estimate_c_point(spec);
  CHECK(est.c == 1.0);
  CHECK(est.c_se == 0.0);
  CHECK(est.c_sq == 1.0);
  CHECK(est.c_sq_se == 0.0);
  CHECK(est.n == 500);
  CHECK(est.window_side > 0.0);
}

TEST_CASE("point correlation of the pair-counting score matches the closed form") {
  auto spec = base_spec();
  spec.tau = 1.0;
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.n_point = 20000;
  auto est = estimate_c_point(spec);
  double m = kPi * 0.25;
  CHECK(std::fabs(est.c - m / 2.0) <= 4.0 * est.c_se);
  CHECK(std::fabs(est.c_sq - (m + m * m) / 4.0) <= 4.0 * est.c_sq_se);
  CHECK(est.c_se > 0.0);
  CHECK(est.c_se < 0.01);
}

TEST_CASE("pair correlation at a fixed displacement matches the closed form") {
  auto spec = base_spec();
  spec.tau = 1.0;
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.n_pair = 20000;
  auto est = estimate_c_pair(spec, Point{0.3, 0.0});
  double m = kPi * 0.25;
  double want = -0.25 * (1.0 * lens_area(0.3, 0.5) + (2.0 * m + 1.0));
  CHECK(std::fabs(est.value - want) <= 4.0 * est.se);
  CHECK(est.se > 0.0);

  // Beyond every interaction the covariance density vanishes.
  auto far = estimate_c_pair(spec, Point{2.5, 0.0});
  CHECK(std::fabs(far.value) <= 4.0 * far.se);
}

TEST_CASE("variance density of the trivial score is exactly one") {
  auto spec = base_spec();
  spec.n_point = 2000;
  auto est = estimate_sigma2(spec);
  CHECK(est.value == 1.0);
  CHECK(est.se == 0.0);
  CHECK(est.nodes_used == 0);
  CHECK(est.c_point == 1.0);
  CHECK(est.c_sq == 1.0);
}

TEST_CASE("variance density of the pair-counting score matches the closed form") {
  auto spec = base_spec();
  spec.tau = 1.0;
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.n_point = 10000;
  spec.quad_r_cut = 2.0;
  spec.quad_nodes = 32;
  auto est = estimate_sigma2(spec);
  double m = kPi * 0.25;
  double want = m / 2.0 + m * m;
  CHECK(std::fabs(est.value - want) <= 5.0 * est.se + est.tail_bound);
  CHECK(est.se > 0.0);
  CHECK(est.nodes_used >= 14);
  CHECK(est.nodes_used <= 20);
  CHECK(est.r_stop >= 0.875);  // support of the integrand ends at 2s = 1
  CHECK(est.tail_bound < 0.05);
}

TEST_CASE("quadrature that cannot see the decay refuses to report") {
  auto spec = base_spec();
  spec.tau = 1.0;
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.n_point = 2000;
  spec.quad_r_cut = 0.2;  // integrand support reaches 1.0
  spec.quad_nodes = 4;
  CHECK_THROWS_AS(estimate_sigma2(spec), DecayNotDetected);
}

TEST_CASE("pinned insertion windows are validated against the score reach") {
  auto spec = base_spec();
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.n_point = 2000;
  spec.insertion_side = 1.0;  // needs 2 * (q99 + range) = 3
  CHECK_THROWS_AS(estimate_c_point(spec), WindowTooSmall);
  spec.insertion_side = 6.0;
  auto est = estimate_c_point(spec);
  CHECK(est.window_side == 6.0);
}

TEST_CASE("non-stationary scores are rejected by the correlation estimators") {
  auto spec = base_spec();
  spec.score = ScoreSpec::maximal(RegionA{}, 4.0);
  CHECK_THROWS_AS(estimate_c_point(spec), DomainError);
  CHECK_THROWS_AS(estimate_c_pair(spec, Point{0.3, 0.0}), DomainError);
  CHECK_THROWS_AS(estimate_sigma2(spec), DomainError);
}

TEST_CASE("marked scores demand a mark distribution") {
  auto spec = base_spec();
  spec.score = ScoreSpec::birth_growth(1.0);
  spec.n_point = 2000;
  CHECK_THROWS_AS(estimate_c_point(spec), MissingMarks);
  spec.sampler.marks = MarkDist::kUniform01;
  auto est = estimate_c_point(spec);
  CHECK(est.c > 0.0);
  CHECK(est.c <= 1.0);
}

TEST_CASE("stabilization radius tail of the pair-counting score is a step") {
  auto spec = base_spec();
  spec.score = ScoreSpec::clique(1, 0.5);
  spec.lambdas = {100.0};
  spec.n_reps = 50;
  auto t = tail_estimate(TailMode::kStabilizationRadius, spec,
                         {0.25, 0.5, 0.75});
  REQUIRE(t.grid.size() == 3);
  CHECK(t.survival[0] == 1.0);
  CHECK(t.survival[1] == 0.0);  // every radius equals s exactly
  CHECK(t.survival[2] == 0.0);
  CHECK(t.w_survival[0] == 1.0);
  CHECK(t.w_survival[1] == 0.0);
  CHECK(!t.fit_ok);
  CHECK(t.n_points > 0);
  CHECK_THROWS_AS(tail_estimate(TailMode::kStabilizationRadius, spec,
                                {0.25, 0.5, 0.75}, true),
                  InsufficientTail);
}

TEST_CASE("clan tail without interaction is identically zero") {
  auto spec = base_spec();
  spec.lambdas = {100.0};
  spec.n_reps = 50;
  auto t = tail_estimate(TailMode::kClanDiameter, spec, {0.0, 0.1, 1.0});
  for (double s : t.survival) CHECK(s == 0.0);
  for (double s : t.w_survival) CHECK(s == 0.0);
  CHECK(!t.fit_ok);
}

TEST_CASE("clan tail under interaction is log-linear") {
  auto spec = base_spec();
  spec.tau = 0.6 / (4.0 * kPi);
  spec.beta = 1.0;
  spec.lambdas = {400.0};
  spec.n_reps = 300;
  auto t = tail_estimate(TailMode::kClanDiameter, spec,
                         {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0},
                         true);
  CHECK(t.fit_ok);
  CHECK(t.fit.slope < 0.0);
  CHECK(t.fit.r2 >= 0.9);
  CHECK(t.n_points > 200);
}

TEST_CASE("truncation mismatch is monotone and vanishes where it should") {
  auto spec = base_spec();
  spec.score = ScoreSpec::clique(1, 0.7);
  spec.lambdas = {100.0};
  spec.n_reps = 200;

  // No interaction: truncation is exact at every level.
  auto zero = truncation_mismatch(spec, {0.0, 0.5, 2.0, kInf});
  for (const auto& pt : zero) CHECK(pt.fraction == 0.0);

  spec.tau = 0.6 / (4.0 * kPi);
  spec.beta = 1.0;
  auto pts = truncation_mismatch(spec, {0.0, 0.5, 1.0, 2.0, 4.0, kInf});
  REQUIRE(pts.size() == 6);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    CHECK(pts[i + 1].fraction <= pts[i].fraction);
  CHECK(pts[0].fraction > 0.0);  // rho = 0 truncates every clan-bearing rep
  CHECK(pts.back().fraction == 0.0);
  CHECK(pts.back().rho == kInf);
}

TEST_CASE("conditional variance probe of the free count") {
  auto spec = base_spec();
  auto probe = conditional_variance_probe(spec, 4.0, 9.0, 40, 40);
  // Conditional count variance inside the resampled box is tau * volume.
  CHECK(std::fabs(probe.value - 0.5 * 4.0) <= 4.0 * probe.se);
  CHECK(probe.se > 0.0);
  CHECK(probe.n_outer == 40);
  CHECK(probe.n_inner == 40);

  spec.score = ScoreSpec::constant(0.0);
  auto flat = conditional_variance_probe(spec, 4.0, 9.0, 10, 10);
  CHECK(flat.value == 0.0);
  CHECK(flat.se == 0.0);

  spec.score = ScoreSpec::knn_length(1);
  CHECK_THROWS_AS(conditional_variance_probe(spec, 4.0, 9.0, 10, 10),
                  DomainError);
}

TEST_CASE("rho coefficient resolution") {
  auto spec = base_spec();
  spec.lambdas = {100.0};
  std::string note;
  CHECK(resolve_rho_c(spec, &note) == 0.0);
  CHECK(note.find("exact") != std::string::npos);

  spec.tau = 0.6 / (4.0 * kPi);
  spec.beta = 1.0;
  spec.lambdas = {100.0, 400.0};
  spec.n_reps = 100;
  std::string note2;
  double c = resolve_rho_c(spec, &note2);
  CHECK(c >= 0.0);
  CHECK(!note2.empty());
}
