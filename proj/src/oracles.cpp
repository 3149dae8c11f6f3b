#include "gibbsgeom/oracles.hpp"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/numerics.hpp"
#include "gibbsgeom/rng.hpp"
#include "gibbsgeom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace gibbsgeom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<std::size_t> naive_neighbors(const PointConfiguration& config,
                                         const Point& x, double r,
                                         long exclude) {
  std::vector<std::size_t> out;
  double r2 = r * r;
  for (std::size_t j = 0; j < config.size(); ++j) {
    if (static_cast<long>(j) == exclude) continue;
    if (config.window.distance2(x, config.points[j]) <= r2) out.push_back(j);
  }
  return out;
}

double naive_kth_nearest(const PointConfiguration& config, const Point& x,
                         int k, long exclude) {
  std::vector<std::pair<double, std::uint32_t>> d;
  for (std::size_t j = 0; j < config.size(); ++j) {
    if (static_cast<long>(j) == exclude) continue;
    d.emplace_back(config.window.distance(x, config.points[j]),
                   static_cast<std::uint32_t>(j));
  }
  if (d.size() < static_cast<std::size_t>(k)) return 0.0;
  std::sort(d.begin(), d.end());
  return d[k - 1].first;
}

std::uint64_t brute_clique_count(const PointConfiguration& config, int k,
                                 double s) {
  std::size_t n = config.size();
  double s2 = s * s;
  std::uint64_t count = 0;
  std::vector<std::size_t> pick;
  auto rec = [&](auto&& self, std::size_t start, int need) -> void {
    if (need == 0) {
      for (std::size_t a = 0; a < pick.size(); ++a) {
        for (std::size_t b = a + 1; b < pick.size(); ++b) {
          if (config.window.distance2(config.points[pick[a]],
                                      config.points[pick[b]]) > s2) {
            return;
          }
        }
      }
      ++count;
      return;
    }
    for (std::size_t t = start; t < n; ++t) {
      pick.push_back(t);
      self(self, t + 1, need - 1);
      pick.pop_back();
    }
  };
  rec(rec, 0, k + 1);
  return count;
}

std::vector<int> brute_maximal(const PointConfiguration& config,
                               const RegionA& region, double region_lambda) {
  std::size_t n = config.size();
  std::vector<int> out(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_region(region, region_lambda, config.points[i])) {
      out[i] = -1;
      continue;
    }
    for (std::size_t j = 0; j < n && out[i] == 1; ++j) {
      if (j == i) continue;
      const Point& y = config.points[j];
      const Point& x = config.points[i];
      if (!in_region(region, region_lambda, y)) continue;
      if (y == x) continue;
      bool dom = true;
      for (int a = 0; a < x.dim(); ++a) {
        if (y[a] < x[a]) {
          dom = false;
          break;
        }
      }
      if (dom) out[i] = 0;
    }
  }
  return out;
}

std::vector<int> sequential_birth_growth(const PointConfiguration& config,
                                         double speed) {
  std::size_t n = config.size();
  if (n > 0 && config.marks.size() != n) {
    throw MissingMarks("birth-growth oracle needs marked points");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.marks[a] < config.marks[b];
  });
  std::vector<int> accepted(n, 0);
  std::vector<std::size_t> alive;
  for (std::size_t i : order) {
    bool blocked = false;
    for (std::size_t j : alive) {
      double dist = config.window.distance(config.points[i], config.points[j]);
      if (dist <= speed * (config.marks[i] - config.marks[j])) {
        blocked = true;
        break;
      }
    }
    if (!blocked) {
      accepted[i] = 1;
      alive.push_back(i);
    }
  }
  return accepted;
}

double torus_tessellation_length(const PointConfiguration& config,
                                 int image_shells) {
  if (config.window.dim() != 2) {
    throw InvalidParams("tessellation oracle is two-dimensional");
  }
  double lx = config.window.side[0];
  double ly = config.window.side[1];
  std::size_t n = config.size();
  double total = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const Point& x = config.points[i];
    std::vector<std::pair<double, double>> offs;
    for (std::size_t j = 0; j < n; ++j) {
      for (int kx = -image_shells; kx <= image_shells; ++kx) {
        for (int ky = -image_shells; ky <= image_shells; ++ky) {
          double ox = config.points[j][0] - x[0] + kx * lx;
          double oy = config.points[j][1] - x[1] + ky * ly;
          if (ox * ox + oy * oy == 0.0) continue;
          offs.emplace_back(ox, oy);
        }
      }
    }
    for (std::size_t e = 0; e < offs.size(); ++e) {
      auto [ux, uy] = offs[e];
      double un = std::sqrt(ux * ux + uy * uy);
      double mx = ux / 2.0;
      double my = uy / 2.0;
      double ex = -uy / un;
      double ey = ux / un;
      double lo = -kInf;
      double hi = kInf;
      bool empty = false;
      for (std::size_t f = 0; f < offs.size() && !empty; ++f) {
        if (f == e) continue;
        auto [wx, wy] = offs[f];
        double b = ex * wx + ey * wy;
        double c = (wx * wx + wy * wy) / 2.0 - (mx * wx + my * wy);
        if (b == 0.0) {
          if (c < 0.0) empty = true;
        } else if (b > 0.0) {
          hi = std::min(hi, c / b);
        } else {
          lo = std::max(lo, c / b);
        }
      }
      if (!empty && std::isfinite(lo) && std::isfinite(hi) && hi > lo) {
        total += hi - lo;
      }
    }
  }
  return total / 2.0;  // each tessellation edge is seen from both cells
}

double brute_kolmogorov(const std::vector<double>& values) {
  std::size_t n = values.size();
  double d = 0.0;
  for (double v : values) {
    std::size_t le = 0;
    std::size_t lt = 0;
    for (double w : values) {
      if (w <= v) ++le;
      if (w < v) ++lt;
    }
    double phi = norm_cdf(v);
    d = std::max(d, std::abs(static_cast<double>(le) / n - phi));
    d = std::max(d, std::abs(phi - static_cast<double>(lt) / n));
  }
  return d;
}

double independent_knn_total(const PointConfiguration& config, int k) {
  std::size_t n = config.size();
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      d.emplace_back(config.window.distance2(config.points[i], config.points[j]),
                     j);
    }
    std::size_t kk = std::min<std::size_t>(k, d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    for (std::size_t t = 0; t < kk; ++t) {
      std::size_t j = d[t].second;
      edges.emplace(std::min(i, j), std::max(i, j));
    }
  }
  double total = 0.0;
  for (const auto& [a, b] : edges) {
    total += config.window.distance(config.points[a], config.points[b]);
  }
  return total;
}

double poisson_gof_pvalue(const std::vector<long>& counts, double mean) {
  std::size_t n = counts.size();
  if (n == 0 || !(mean > 0.0)) return 1.0;
  auto pmf = [&](long k) {
    return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
  };
  // Build bins [lo, hi] with expected count >= 5; the last bin is open.
  struct Bin {
    long lo;
    long hi;  // inclusive; hi < 0 means open-ended
    double p;
  };
  std::vector<Bin> bins;
  double closed_mass = 0.0;
  double bin_p = 0.0;
  long lo = 0;
  for (long k = 0;; ++k) {
    bin_p += pmf(k);
    double remaining = 1.0 - closed_mass - bin_p;
    if (remaining * n < 5.0) {
      bins.push_back({lo, -1, bin_p + remaining});
      break;
    }
    if (bin_p * n >= 5.0) {
      bins.push_back({lo, k, bin_p});
      closed_mass += bin_p;
      bin_p = 0.0;
      lo = k + 1;
    }
  }
  if (bins.size() >= 2 && bins.back().p * n < 5.0) {
    Bin tail = bins.back();
    bins.pop_back();
    bins.back().hi = -1;
    bins.back().p += tail.p;
  }
  if (bins.size() < 2) return 1.0;

  std::vector<long> obs(bins.size(), 0);
  for (long c : counts) {
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (c >= bins[b].lo && (bins[b].hi < 0 || c <= bins[b].hi)) {
        ++obs[b];
        break;
      }
    }
  }
  double chi2 = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    double exp_b = bins[b].p * n;
    double diff = obs[b] - exp_b;
    chi2 += diff * diff / exp_b;
  }
  return chi2_sf(chi2, static_cast<int>(bins.size()) - 1);
}

namespace {

PointConfiguration random_config(Rng& rng, int dim, long n, double side,
                                 Boundary b, bool marked, double mark_hi) {
  PointConfiguration c;
  c.window = Window::cube(std::pow(side, dim), dim, b);
  for (long i = 0; i < n; ++i) {
    Point p(dim);
    for (int a = 0; a < dim; ++a) {
      p[a] = rng.uniform(c.window.lo(a), c.window.hi(a));
    }
    if (marked) {
      c.add(p, rng.uniform(0.0, mark_hi));
    } else {
      c.add(p);
    }
  }
  return c;
}

OracleRow suite_neighbors(std::uint64_t seed) {
  OracleRow row{"neighbors", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 1));
  for (int c = 0; c < 1000; ++c) {
    int dim = 1 + static_cast<int>(rng.uniform_index(3));
    Boundary b = (c % 2 == 0) ? Boundary::kFree : Boundary::kPeriodic;
    long n = rng.uniform_index(41);
    double side = rng.uniform(0.5, 4.0);
    PointConfiguration cfg = random_config(rng, dim, n, side, b, false, 0.0);
    Point x(dim);
    if (n > 0 && rng.uniform() < 0.5) {
      x = cfg.points[rng.uniform_index(n)];
    } else {
      for (int a = 0; a < dim; ++a) {
        x[a] = rng.uniform(cfg.window.lo(a), cfg.window.hi(a));
      }
    }
    long exclude = (n > 0 && rng.uniform() < 0.5)
                       ? static_cast<long>(rng.uniform_index(n))
                       : -1;
    double r = rng.uniform(0.0, side * 1.2);
    NeighborIndex idx(cfg);
    auto got = idx.neighbors_within(x, r, exclude);
    auto want = naive_neighbors(cfg, x, r, exclude);
    ++row.cases;
    bool ok = got.size() == want.size();
    if (ok) {
      for (std::size_t t = 0; t < got.size(); ++t) {
        if (static_cast<std::size_t>(got[t]) != want[t]) ok = false;
      }
    }
    int k = 1 + static_cast<int>(rng.uniform_index(5));
    double dk_got = idx.kth_nearest(x, k, exclude);
    double dk_want = naive_kth_nearest(cfg, x, k, exclude);
    if (dk_got != dk_want) ok = false;
    row.max_err = std::max(row.max_err, std::abs(dk_got - dk_want));
    if (!ok) ++row.failures;
  }
  return row;
}

OracleRow suite_clique(std::uint64_t seed) {
  OracleRow row{"clique", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 2));
  for (int c = 0; c < 500; ++c) {
    int dim = 1 + static_cast<int>(rng.uniform_index(3));
    Boundary b = (c % 2 == 0) ? Boundary::kFree : Boundary::kPeriodic;
    long n = rng.uniform_index(21);
    double side = rng.uniform(1.0, 3.0);
    int k = 1 + static_cast<int>(rng.uniform_index(3));
    double s = rng.uniform(0.2, 1.5);
    PointConfiguration cfg = random_config(rng, dim, n, side, b, false, 0.0);
    std::uint64_t got = clique_total_count(k, s, cfg);
    std::uint64_t want = brute_clique_count(cfg, k, s);
    ++row.cases;
    if (got != want) {
      ++row.failures;
      row.max_err = std::max(
          row.max_err, std::abs(static_cast<double>(got) -
                                static_cast<double>(want)));
    }
  }
  return row;
}

OracleRow suite_maximal(std::uint64_t seed) {
  OracleRow row{"maximal", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 3));
  for (int c = 0; c < 500; ++c) {
    int dim = 1 + static_cast<int>(rng.uniform_index(3));
    double offset = rng.uniform(0.3, 1.0);
    double mag = rng.uniform(1.0 / 64.0, std::min(offset, 2.0));
    RegionA region = region_a(offset, -mag);
    double lam = rng.uniform(0.5, 8.0);
    double L = std::pow(lam, 1.0 / dim);
    long n = rng.uniform_index(21);
    PointConfiguration cfg;
    Point zero = Point::zero(dim);
    Point hi(dim);
    for (int a = 0; a < dim; ++a) hi[a] = L;
    cfg.window = Window::box(zero, hi, Boundary::kFree);
    for (long i = 0; i < n; ++i) {
      Point p(dim);
      for (int a = 0; a < dim; ++a) p[a] = rng.uniform(0.0, L);
      cfg.add(p);
    }
    ScoreSpec spec = ScoreSpec::maximal(region, lam);
    auto got = score_all(spec, cfg);
    auto want = brute_maximal(cfg, region, lam);
    ++row.cases;
    bool ok = true;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if (want[i] < 0) continue;  // outside region: skipped by score_all
      if (got[i].value != static_cast<double>(want[i])) ok = false;
    }
    if (!ok) ++row.failures;
  }
  return row;
}

OracleRow suite_birth_growth(std::uint64_t seed) {
  OracleRow row{"birth_growth", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 4));
  for (int c = 0; c < 500; ++c) {
    int dim = 1 + static_cast<int>(rng.uniform_index(3));
    Boundary b = (c % 2 == 0) ? Boundary::kFree : Boundary::kPeriodic;
    long n = rng.uniform_index(51);
    double side = rng.uniform(1.0, 3.0);
    double v = rng.uniform(0.3, 3.0);
    PointConfiguration cfg = random_config(rng, dim, n, side, b, true, 2.0);
    ScoreSpec spec = ScoreSpec::birth_growth(v);
    auto got = score_all(spec, cfg);
    auto want = sequential_birth_growth(cfg, v);
    ++row.cases;
    bool ok = true;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if (got[i].value != static_cast<double>(want[i])) ok = false;
    }
    if (!ok) ++row.failures;
  }
  return row;
}

OracleRow suite_voronoi(std::uint64_t seed) {
  OracleRow row{"voronoi", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 5));
  for (int c = 0; c < 150; ++c) {
    long n = 2 + rng.uniform_index(11);
    double side = rng.uniform(1.0, 2.5);
    PointConfiguration cfg =
        random_config(rng, 2, n, side, Boundary::kPeriodic, false, 0.0);
    ScoreSpec spec = ScoreSpec::voronoi_length();
    auto got = score_all(spec, cfg);
    double total = 0.0;
    double max_r = 0.0;
    bool finite = true;
    for (const auto& r : got) {
      total += r.value;
      if (!std::isfinite(r.radius)) finite = false;
      max_r = std::max(max_r, r.radius);
    }
    ++row.cases;
    if (!finite) {
      ++row.failures;
      continue;
    }
    int shells = static_cast<int>(std::ceil(max_r / side)) + 1;
    double want = torus_tessellation_length(cfg, shells);
    double rel = std::abs(total - want) / std::max(want, 1e-12);
    row.max_err = std::max(row.max_err, rel);
    if (rel > 1e-9) ++row.failures;
  }
  return row;
}

OracleRow suite_knn(std::uint64_t seed) {
  OracleRow row{"knn_total", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 6));
  for (int c = 0; c < 60; ++c) {
    Boundary b = (c % 2 == 0) ? Boundary::kFree : Boundary::kPeriodic;
    long n = 2 + rng.uniform_index(199);
    double side = rng.uniform(1.0, 4.0);
    int k = 1 + static_cast<int>(rng.uniform_index(3));
    PointConfiguration cfg = random_config(rng, 2, n, side, b, false, 0.0);
    ScoreSpec spec = ScoreSpec::knn_length(k);
    double got = total_score(spec, cfg, cfg.window);
    double want = independent_knn_total(cfg, k);
    double rel = std::abs(got - want) / std::max(want, 1e-12);
    ++row.cases;
    row.max_err = std::max(row.max_err, rel);
    if (rel > 1e-10) ++row.failures;
  }
  return row;
}

OracleRow suite_kolmogorov(std::uint64_t seed) {
  OracleRow row{"kolmogorov", 0, 0, 0.0};
  Rng rng(derive_seed(seed, 7));
  for (int c = 0; c < 200; ++c) {
    std::size_t n = 1 + rng.uniform_index(300);
    std::vector<double> v(n);
    double scale = rng.uniform(0.5, 2.0);
    double shift = rng.uniform(-1.0, 1.0);
    for (auto& x : v) x = rng.gaussian() * scale + shift;
    if (n > 3 && rng.uniform() < 0.3) {
      // force ties
      for (std::size_t t = 0; t + 1 < n; t += 3) v[t + 1] = v[t];
    }
    double got = kolmogorov_distance(v);
    double want = brute_kolmogorov(v);
    ++row.cases;
    row.max_err = std::max(row.max_err, std::abs(got - want));
    if (got != want) ++row.failures;
  }
  return row;
}

}  // namespace

std::vector<OracleRow> run_oracle_suites(std::uint64_t seed) {
  std::vector<OracleRow> rows;
  rows.push_back(suite_neighbors(seed));
  rows.push_back(suite_clique(seed));
  rows.push_back(suite_maximal(seed));
  rows.push_back(suite_birth_growth(seed));
  rows.push_back(suite_voronoi(seed));
  rows.push_back(suite_knn(seed));
  rows.push_back(suite_kolmogorov(seed));
  return rows;
}

}  // namespace gibbsgeom
