#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/oracles.hpp"
#include "gibbsgeom/rng.hpp"
#include "gibbsgeom/sampler.hpp"
#include "gibbsgeom/scores.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace gibbsgeom;

namespace {

constexpr double kPi = 3.14159265358979323846;

PointConfiguration on_window(const Window& w, std::initializer_list<Point> pts) {
  PointConfiguration c;
  c.window = w;
  for (const auto& p : pts) c.add(p);
  return c;
}

PointConfiguration random_free_config(Rng& r, int dim, long n, double half,
                                      bool marked) {
  PointConfiguration c;
  c.window = Window::cube(std::pow(2.0 * half, dim), dim);
  for (long i = 0; i < n; ++i) {
    Point p(dim);
    for (int j = 0; j < dim; ++j) p[j] = r.uniform(-half, half);
    if (marked) c.add(p, r.uniform());
    else c.add(p);
  }
  return c;
}

}  // namespace

TEST_CASE("clique score on the hand-built anchors") {
  Window w = Window::cube(100.0, 2);
  double h = 0.25 * std::sqrt(3.0);
  auto triangle = on_window(w, {Point{0.0, 0.0}, Point{0.5, 0.0}, Point{0.25, h}});
  auto spec = ScoreSpec::clique(2, 1.0);
  auto res = score_all(spec, triangle);
  for (const auto& r : res) {
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.radius == 1.0);
  }
  CHECK(total_score(spec, triangle, w) == 1.0);

  auto pair_spec = ScoreSpec::clique(1, 1.0);
  auto two_nbrs = on_window(w, {Point{0.0, 0.0}, Point{0.6, 0.0}, Point{-0.6, 0.0}});
  auto pr = score_point(pair_spec, two_nbrs.points[0], 0.0,
                        on_window(w, {Point{0.6, 0.0}, Point{-0.6, 0.0}}));
  CHECK(pr.value == 1.0);

  auto isolated = on_window(w, {Point{5.0, 5.0}});
  CHECK(score_all(spec, isolated)[0].value == 0.0);
}

TEST_CASE("clique totals equal exhaustive enumeration") {
  Rng r(4004);
  for (int trial = 0; trial < 120; ++trial) {
    int d = 1 + int(r.uniform_index(3));
    long n = long(r.uniform_index(21));
    auto c = random_free_config(r, d, n, 1.5, false);
    int k = 1 + int(r.uniform_index(3));
    double s = r.uniform(0.3, 1.5);
    std::uint64_t want = brute_clique_count(c, k, s);
    CHECK(clique_total_count(k, s, c) == want);
    CHECK(total_score(ScoreSpec::clique(k, s), c, c.window) == double(want));
  }
}

TEST_CASE("knn length score anchors") {
  Window w = Window::cube(100.0, 1);
  auto spec = ScoreSpec::knn_length(1);

  auto pair = on_window(w, {Point{0.0}, Point{1.0}});
  auto res = score_all(spec, pair);
  CHECK(res[0].value == 0.5);
  CHECK(res[1].value == 0.5);
  CHECK(total_score(spec, pair, w) == 1.0);

  auto line = on_window(w, {Point{0.0}, Point{1.0}, Point{3.0}});
  auto lr = score_all(spec, line);
  CHECK(lr[0].value == 0.5);
  CHECK(lr[1].value == 1.5);
  CHECK(lr[2].value == 1.0);
  CHECK(total_score(spec, line, w) == 3.0);

  auto solo = on_window(w, {Point{2.0}});
  CHECK(score_all(spec, solo)[0].value == 0.0);
}

TEST_CASE("knn totals match the independent graph construction") {
  Rng r(5005);
  for (int trial = 0; trial < 30; ++trial) {
    int d = 1 + int(r.uniform_index(2));
    Boundary b = (trial % 2 == 0) ? Boundary::kFree : Boundary::kPeriodic;
    long n = 2 + long(r.uniform_index(399));
    PointConfiguration c;
    c.window = Window::cube(25.0, d, b);
    for (long i = 0; i < n; ++i) {
      Point p(d);
      for (int j = 0; j < d; ++j) p[j] = r.uniform(c.window.lo(j), c.window.hi(j));
      c.add(p);
    }
    int k = 1 + int(r.uniform_index(3));
    auto spec = ScoreSpec::knn_length(k);
    double total = total_score(spec, c, c.window);
    double want = independent_knn_total(c, k);
    CHECK(total == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("voronoi score anchors") {
  Window w = Window::cube(100.0, 2);
  auto spec = ScoreSpec::voronoi_length();

  auto cross = on_window(w, {Point{1.0, 0.0}, Point{-1.0, 0.0}, Point{0.0, 1.0},
                             Point{0.0, -1.0}});
  auto res = score_point(spec, Point{0.0, 0.0}, 0.0, cross);
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-12));

  auto one = on_window(w, {Point{1.0, 0.0}});
  CHECK(score_point(spec, Point{0.0, 0.0}, 0.0, one).value == 0.0);

  auto empty = on_window(w, {});
  auto er = score_point(spec, Point{0.0, 0.0}, 0.0, empty);
  CHECK(er.value == 0.0);
  CHECK(std::isinf(er.radius));

  // Planar only.
  Window w3 = Window::cube(27.0, 3);
  auto c3 = on_window(w3, {Point{1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(score_point(spec, Point{0.0, 0.0, 0.0}, 0.0, c3), InvalidParams);
}

TEST_CASE("periodic voronoi scores sum to the tessellation length") {
  Rng r(6006);
  PointConfiguration c;
  c.window = Window::cube(25.0, 2, Boundary::kPeriodic);
  for (int i = 0; i < 40; ++i)
    c.add(Point{r.uniform(c.window.lo(0), c.window.hi(0)),
                r.uniform(c.window.lo(1), c.window.hi(1))});
  double total = total_score(ScoreSpec::voronoi_length(), c, c.window);
  double want = torus_tessellation_length(c, 2);
  CHECK(total == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("maximal point indicator anchors") {
  RegionA region;  // F(v) = 1 - v/2
  Window w = Window::cube(16.0, 2);

  auto dominated = on_window(w, {Point{1.0, 1.0}});
  auto spec4 = ScoreSpec::maximal(region, 4.0);
  CHECK(in_region(region, 4.0, Point{0.0, 0.0}));
  CHECK(in_region(region, 4.0, Point{1.0, 1.0}));
  CHECK(score_point(spec4, Point{0.0, 0.0}, 0.0, dominated).value == 0.0);

  auto lefty = on_window(w, {Point{-1.0, 0.5}});
  CHECK(score_point(spec4, Point{0.0, 0.0}, 0.0, lefty).value == 1.0);

  CHECK_THROWS_AS(
      score_point(spec4, Point{-0.5, 0.5}, 0.0, on_window(w, {})), DomainError);

  CHECK(in_region(region, 1.0, Point{0.2, 0.8}));
  CHECK(!in_region(region, 1.0, Point{0.2, 0.95}));
  CHECK(!in_region(region, 1.0, Point{-0.1, 0.2}));
  CHECK(!in_region(region, 1.0, Point{0.5, -0.01}));
}

TEST_CASE("maximal indicators equal the domination oracle") {
  Rng r(7007);
  RegionA region;
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + int(r.uniform_index(2));
    double L = 9.0;
    double side = std::pow(L, 1.0 / d);
    PointConfiguration c;
    c.window = Window::box(Point::zero(d), [&] {
      Point h(d);
      for (int j = 0; j < d; ++j) h[j] = side;
      return h;
    }());
    long n = long(r.uniform_index(21));
    for (long i = 0; i < n; ++i) {
      Point p(d);
      for (int j = 0; j < d; ++j) p[j] = r.uniform(0.0, side);
      c.add(p);
    }
    auto got = score_all(ScoreSpec::maximal(region, L), c);
    auto want = brute_maximal(c, region, L);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (want[i] < 0) {
        CHECK(got[i].value == 0.0);
        CHECK(got[i].radius == 0.0);
      } else {
        CHECK(got[i].value == double(want[i]));
      }
    }
  }
}

TEST_CASE("birth growth anchors") {
  Window w = Window::cube(100.0, 1);
  auto spec = ScoreSpec::birth_growth(1.0);

  PointConfiguration empty;
  empty.window = w;
  auto solo = score_point(spec, Point{0.0}, 0.7, empty);
  CHECK(solo.value == 1.0);
  CHECK(solo.radius == doctest::Approx(0.7));

  PointConfiguration first;
  first.window = w;
  first.add(Point{0.0}, 0.0);
  auto blocked = score_point(spec, Point{1.0}, 2.0, first);
  CHECK(blocked.value == 0.0);
  CHECK(blocked.radius == doctest::Approx(1.0));

  PointConfiguration second;
  second.window = w;
  second.add(Point{1.0}, 2.0);
  CHECK(score_point(spec, Point{0.0}, 0.0, second).value == 1.0);

  PointConfiguration both;
  both.window = w;
  both.add(Point{0.0}, 0.0);
  both.add(Point{1.0}, 2.0);
  CHECK(total_score(spec, both, w) == 1.0);

  PointConfiguration unmarked;
  unmarked.window = w;
  unmarked.add(Point{0.0});
  CHECK_THROWS_AS(score_point(spec, Point{1.0}, 2.0, unmarked), MissingMarks);
}

TEST_CASE("birth growth equals the sequential acceptance oracle") {
  Rng r(8008);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + int(r.uniform_index(3));
    long n = long(r.uniform_index(51));
    auto c = random_free_config(r, d, n, 1.5, true);
    double v = r.uniform(0.3, 3.0);
    auto got = score_all(ScoreSpec::birth_growth(v), c);
    auto want = sequential_birth_growth(c, v);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(got[i].value == double(want[i]));
  }
}

TEST_CASE("insurance claim anchors") {
  Window w = Window::cube(100.0, 2);
  auto spec = ScoreSpec::insurance(1, 1.0);

  PointConfiguration empty;
  empty.window = w;
  auto solo = score_point(spec, Point{0.0, 0.0}, 0.5, empty);
  CHECK(solo.value == 0.0);
  CHECK(std::isinf(solo.radius));

  PointConfiguration near;
  near.window = w;
  near.add(Point{0.3, 0.0}, 0.5);
  auto nr = score_point(spec, Point{0.0, 0.0}, 0.5, near);
  CHECK(nr.value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(nr.radius == doctest::Approx(0.3).epsilon(1e-12));

  // Spatial distance 3, time gap 4: space-time distance 5, capped at 1.
  PointConfiguration far;
  far.window = w;
  far.add(Point{3.0, 0.0}, 4.5);
  auto fr = score_point(spec, Point{0.0, 0.0}, 0.5, far);
  CHECK(fr.value == 1.0);
  CHECK(fr.radius == doctest::Approx(5.0).epsilon(1e-12));

  // Fewer than k other claims: zero by the singleton convention.
  auto spec3 = ScoreSpec::insurance(3, 1.0);
  auto few = score_point(spec3, Point{0.0, 0.0}, 0.5, near);
  CHECK(few.value == 0.0);
  CHECK(std::isinf(few.radius));

  PointConfiguration unmarked;
  unmarked.window = w;
  unmarked.add(Point{0.3, 0.0});
  CHECK_THROWS_AS(score_point(spec, Point{0.0, 0.0}, 0.5, unmarked), MissingMarks);
}

TEST_CASE("per point scores are nonnegative and consistent with the batch path") {
  Rng r(9009);
  for (int trial = 0; trial < 60; ++trial) {
    int d = 2;
    long n = 1 + long(r.uniform_index(30));
    bool marked = trial % 3 == 0;
    auto c = random_free_config(r, d, n, 2.0, marked);
    ScoreSpec spec;
    switch (trial % (marked ? 2 : 4)) {
      case 0:
        spec = marked ? ScoreSpec::birth_growth(1.0) : ScoreSpec::clique(1, 0.8);
        break;
      case 1:
        spec = marked ? ScoreSpec::insurance(2, 1.5) : ScoreSpec::knn_length(2);
        break;
      case 2: spec = ScoreSpec::voronoi_length(); break;
      default: spec = ScoreSpec::constant(2.5); break;
    }
    auto batch = score_all(spec, c);
    double manual_total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(batch[i].value >= 0.0);
      CHECK(batch[i].radius >= 0.0);
      PointConfiguration rest;
      rest.window = c.window;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (j == i) continue;
        if (marked) rest.add(c.points[j], c.marks[j]);
        else rest.add(c.points[j]);
      }
      auto single = score_point(spec, c.points[i], marked ? c.marks[i] : 0.0, rest);
      CHECK(single.value == batch[i].value);
      CHECK(single.radius == batch[i].radius);
      manual_total += single.value;
    }
    CHECK(total_score(spec, c, c.window) ==
          doctest::Approx(manual_total).epsilon(1e-12));
  }
}

TEST_CASE("inserting a point beyond the certified radius never moves the value") {
  Rng r(1010);
  int skipped = 0, tested = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int d = 2;
    long n = long(r.uniform_index(25));
    int variant = trial % 5;
    bool marked = variant >= 3;
    auto c = random_free_config(r, d, n, 2.0, marked);
    ScoreSpec spec;
    switch (variant) {
      case 0: spec = ScoreSpec::clique(1 + int(r.uniform_index(2)), r.uniform(0.4, 1.2)); break;
      case 1: spec = ScoreSpec::knn_length(1 + int(r.uniform_index(3))); break;
      case 2: spec = ScoreSpec::voronoi_length(); break;
      case 3: spec = ScoreSpec::birth_growth(r.uniform(0.5, 2.0)); break;
      default: spec = ScoreSpec::insurance(1 + int(r.uniform_index(2)), 2.0); break;
    }
    Point x{r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0)};
    double mark_x = marked ? r.uniform() : 0.0;
    auto before = score_point(spec, x, mark_x, c);
    if (!std::isfinite(before.radius)) {
      skipped++;
      continue;
    }
    // A point just past the certificate, in a random direction.
    double ang = r.uniform(0.0, 2 * kPi);
    double dist = before.radius + r.uniform(1e-6, 2.0);
    Point extra{x[0] + dist * std::cos(ang), x[1] + dist * std::sin(ang)};
    if (marked) c.add(extra, r.uniform());
    else c.add(extra);
    auto after = score_point(spec, x, mark_x, c);
    CHECK(after.value == before.value);
    tested++;
  }
  CHECK(tested > 200);
  CHECK(skipped < 200);
}

TEST_CASE("free scores are translation invariant on an exact lattice") {
  Rng r(1111);
  Window w = Window::cube(4096.0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    long n = 2 + long(r.uniform_index(20));
    PointConfiguration c;
    c.window = w;
    bool marked = trial % 4 == 3;
    for (long i = 0; i < n; ++i) {
      Point p{double(long(r.uniform_index(4097)) - 2048) / 256.0,
              double(long(r.uniform_index(4097)) - 2048) / 256.0};
      if (marked) c.add(p, r.uniform());
      else c.add(p);
    }
    Point shift{double(long(r.uniform_index(2049)) - 1024) / 256.0,
                double(long(r.uniform_index(2049)) - 1024) / 256.0};
    PointConfiguration moved;
    moved.window = w;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (marked) moved.add(c.points[i] + shift, c.marks[i]);
      else moved.add(c.points[i] + shift);
    }
    ScoreSpec spec;
    switch (trial % 4) {
      case 0: spec = ScoreSpec::clique(1, 1.0); break;
      case 1: spec = ScoreSpec::knn_length(2); break;
      case 2: spec = ScoreSpec::voronoi_length(); break;
      default: spec = ScoreSpec::birth_growth(1.0); break;
    }
    auto a = score_all(spec, c);
    auto b = score_all(spec, moved);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("clan truncation of the total") {
  Window w = Window::cube(100.0, 2);
  auto pot = Potential::strauss(1.0, 1.0);
  auto spec = ScoreSpec::clique(1, 0.7);
  double tau = 0.6 / (4.0 * kPi);

  auto s = sample_gibbs(pot, tau, 1.0, w, 1313);
  double full = total_score(spec, s.config, w);
  CHECK(truncated_total(spec, s, std::numeric_limits<double>::infinity()) == full);

  double prev = -1.0;
  for (double rho : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 1e9}) {
    double t = truncated_total(spec, s, rho);
    CHECK(t >= prev);
    CHECK(t <= full);
    prev = t;
  }
  CHECK(prev == full);  // every clan fits in a huge ball

  // The per-point view flags exactly the excluded points.
  auto diam = composed_clan_diameters(spec, s);
  auto flagged = truncated_score_all(spec, s, 1.0);
  REQUIRE(flagged.size() == s.config.size());
  double kept = 0.0;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    CHECK(flagged[i].truncated_out == (diam[i] > 1.0));
    if (!flagged[i].truncated_out) kept += flagged[i].value;
  }
  CHECK(kept == truncated_total(spec, s, 1.0));
}

TEST_CASE("no interaction means no truncation at any level") {
  Window w = Window::cube(64.0, 2);
  auto pot = Potential::strauss(1.0, 1.0);
  auto spec = ScoreSpec::knn_length(1);
  auto s = sample_gibbs(pot, 0.5, 0.0, w, 1414);
  double full = total_score(spec, s.config, w);
  for (double rho : {0.0, 0.1, 3.0}) {
    CHECK(truncated_total(spec, s, rho) == full);
  }
  for (double dcomp : composed_clan_diameters(spec, s)) CHECK(dcomp == 0.0);
}

TEST_CASE("truncation demands clan data") {
  GibbsSample bare;
  bare.config = PointConfiguration{Window::cube(4.0, 2), {}, {}};
  bare.config.add(Point{0.0, 0.0});
  bare.config.add(Point{0.5, 0.5});
  CHECK_THROWS_AS(truncated_total(ScoreSpec::constant(1.0), bare, 1.0),
                  MissingClanData);
  CHECK_THROWS_AS(composed_clan_diameters(ScoreSpec::constant(1.0), bare),
                  MissingClanData);
}

TEST_CASE("region construction is validated") {
  CHECK_NOTHROW(region_a(1.0, -0.5));
  CHECK_THROWS_AS(region_a(1.0, 0.1), InvalidParams);   // slope must decrease
  CHECK_THROWS_AS(region_a(1.5, -0.5), InvalidParams);  // F exceeds 1
  CHECK_THROWS_AS(region_a(0.5, -0.9), InvalidParams);  // F dips below 0
  CHECK_THROWS_AS(ScoreSpec::clique(0, 1.0), InvalidParams);
  CHECK_THROWS_AS(ScoreSpec::clique(1, 0.0), InvalidParams);
  CHECK_THROWS_AS(ScoreSpec::knn_length(-1), InvalidParams);
  CHECK_THROWS_AS(ScoreSpec::insurance(1, 0.0), InvalidParams);
  CHECK_THROWS_AS(ScoreSpec::birth_growth(0.0), InvalidParams);
}
