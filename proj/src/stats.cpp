#include "gibbsgeom/stats.hpp"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gibbsgeom {

namespace {

// Stream labels; distinct per consumer so no two estimators share draws.
constexpr std::uint64_t kRepStream = 0x5245504c49434154ull;
constexpr std::uint64_t kInsStream = 0x494e53455254494full;
constexpr std::uint64_t kPilotStream = 0x50494c4f54303031ull;
constexpr std::uint64_t kMarkStream = 0x4d41524b44524157ull;
constexpr std::uint64_t kTailStream = 0x5441494c494e5345ull;
constexpr std::uint64_t kBootStream = 0x424f4f5453545250ull;
constexpr std::uint64_t kOuterStream = 0x4f55544552434647ull;
constexpr std::uint64_t kInnerStream = 0x494e4e4552434647ull;
constexpr std::uint64_t kRhoStream = 0x52484f50494c4f54ull;

double weight_of(double beta, double delta) {
  if (beta == 0.0) return 1.0;  // 0 * inf := 0
  if (std::isinf(delta)) return 0.0;
  return std::exp(-beta * delta);
}

double covariance_of(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc / static_cast<double>(n - 1);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size());
  std::size_t idx = static_cast<std::size_t>(std::ceil(pos));
  if (idx > 0) --idx;
  if (idx >= v.size()) idx = v.size() - 1;
  return v[idx];
}

double origin_mark(const ExperimentSpec& spec, std::uint64_t seed) {
  if (!spec.score.needs_marks()) return 0.0;
  Rng rng(seed);
  switch (spec.sampler.marks) {
    case MarkDist::kUniform01:
      return rng.uniform();
    case MarkDist::kExp1:
      return rng.exponential();
    case MarkDist::kNone:
      break;
  }
  throw MissingMarks("inserted point needs a mark but the sampler draws none");
}

void require_stationary_score(const ExperimentSpec& spec, const char* who) {
  if (spec.score.kind == ScoreKind::kMaximalPoint) {
    throw DomainError(std::string(who) +
                      ": needs a translation-invariant score, and the "
                      "region-restricted maximal score is not one");
  }
}

struct InsertionPlan {
  Window window;
  double side = 0.0;
};

/// Torus used for insertion estimates. The side must cover twice the
/// observed stabilization reach (99th percentile over pilot insertions at
/// the center) plus the interaction range plus any pair offset, otherwise
/// wrap-around couples the inserted point to its own images. A pinned side
/// is validated once; an automatic side doubles up to three times.
InsertionPlan plan_insertion_window(const ExperimentSpec& spec,
                                    double extra_reach) {
  constexpr long kPilotReps = 200;
  const double range = spec.pot.range();
  const bool pinned = spec.insertion_side > 0.0;
  double side = pinned ? spec.insertion_side
                       : std::max(4.0, 4.0 * (range + 1.0) + 2.0 * extra_reach);
  const Point x0 = Point::zero(spec.dim);
  for (int attempt = 0;; ++attempt) {
    Window win = Window::cube(std::pow(side, spec.dim), spec.dim,
                              Boundary::kPeriodic);
    std::vector<double> radii(kPilotReps);
    for (long i = 0; i < kPilotReps; ++i) {
      std::uint64_t s = derive_seed(spec.seed, kPilotStream,
                                    static_cast<std::uint64_t>(attempt),
                                    static_cast<std::uint64_t>(i));
      GibbsSample g = sample_gibbs(spec.pot, spec.tau, spec.beta, win, s,
                                   spec.sampler);
      double mk = origin_mark(spec, derive_seed(s, kMarkStream));
      radii[i] = score_point(spec.score, x0, mk, g.config).radius;
    }
    const double q99 = quantile_of(radii, 0.99);
    const double need = 2.0 * (q99 + range + extra_reach);
    if (std::isfinite(need) && side >= need) return {win, side};
    if (pinned || attempt >= 3) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "insertion window side %.6g cannot hold the stabilization "
                    "reach (needs %.6g)",
                    side, need);
      throw WindowTooSmall(buf);
    }
    side = std::isfinite(need) ? std::max(2.0 * side, need) : 2.0 * side;
  }
}

/// Inserts `p` (with mark when the configuration is marked) as the last
/// point of a scratch configuration reused across quadrature nodes.
void set_scratch_point(PointConfiguration& scratch, const Point& p, double mark) {
  scratch.points.back() = p;
  if (scratch.has_marks()) scratch.marks.back() = mark;
}

}  // namespace

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  long t = std::max(1, threads);
  if (t > n) t = n;
  if (t == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr err;
  auto work = [&]() {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (long i = 0; i < t; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

GibbsSample experiment_replicate(const ExperimentSpec& spec,
                                 std::size_t lambda_index, long rep) {
  if (lambda_index >= spec.lambdas.size())
    throw InvalidParams("experiment_replicate: lambda index out of range");
  Window win = Window::cube(spec.lambdas[lambda_index], spec.dim, spec.boundary);
  std::uint64_t s = derive_seed(spec.seed, kRepStream,
                                static_cast<std::uint64_t>(lambda_index),
                                static_cast<std::uint64_t>(rep));
  return sample_gibbs(spec.pot, spec.tau, spec.beta, win, s, spec.sampler);
}

double kolmogorov_distance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw InvalidParams("kolmogorov_distance: empty sample");
  if (n >= 2 && variance_of(values) == 0.0)
    throw DegenerateVariance("kolmogorov_distance: constant sample");
  std::vector<double> v(values);
  std::sort(v.begin(), v.end());
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = norm_cdf(v[i]);
    // Both one-sided gaps at the jump; ties only widen the later gap.
    d = std::max(d, std::abs(static_cast<double>(i + 1) / dn - phi));
    d = std::max(d, std::abs(phi - static_cast<double>(i) / dn));
  }
  return d;
}

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.empty()) throw InvalidParams("standardize: empty sample");
  const double m = mean_of(values);
  const double sd = std::sqrt(variance_of(values));
  if (!(sd > 0.0)) throw DegenerateVariance("standardize: zero variance");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / sd;
  return out;
}

std::vector<SummaryRecord> variance_scan(const ExperimentSpec& spec) {
  if (spec.lambdas.empty()) throw InvalidParams("variance_scan: empty grid");
  if (spec.n_reps < 2) throw InvalidParams("variance_scan: needs >= 2 reps");
  std::string rho_note;
  const double c = spec.rho_c >= 0.0 ? spec.rho_c : resolve_rho_c(spec, &rho_note);
  std::vector<SummaryRecord> out;
  for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
    SummaryRecord rec;
    rec.lambda = spec.lambdas[li];
    rec.n_reps = spec.n_reps;
    rec.rho = std::max(0.0, c * std::log(rec.lambda));
    try {
      std::vector<double> w(spec.n_reps), w_rho(spec.n_reps);
      parallel_for(spec.n_reps, spec.n_threads, [&](long r) {
        GibbsSample s = experiment_replicate(spec, li, r);
        w[r] = total_score(spec.score, s.config, s.config.window);
        w_rho[r] = truncated_total(spec.score, s, rec.rho);
      });
      rec.mean_w = mean_of(w);
      rec.var_w = variance_of(w);
      rec.var_se = jackknife_variance_se(w);
      rec.var_over_lambda = rec.var_w / rec.lambda;
      long bad = 0;
      for (long r = 0; r < spec.n_reps; ++r)
        if (w[r] != w_rho[r]) ++bad;
      rec.mismatch = static_cast<double>(bad) / static_cast<double>(spec.n_reps);
      try {
        rec.d_k = kolmogorov_distance(standardize(w));
      } catch (const DegenerateVariance&) {
        rec.d_k = 0.5;  // point mass; the farthest any CDF sits from normal
        rec.note = "degenerate variance";
      }
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.note = e.what();
    }
    out.push_back(std::move(rec));
  }
  if (!rho_note.empty()) {
    out.front().note = out.front().note.empty()
                           ? rho_note
                           : out.front().note + "; " + rho_note;
  }
  // Downward drift of var / lambda across the whole grid usually means the
  // fluctuations are surface-order; flag it, don't fail.
  std::vector<double> ratios;
  for (const auto& r : out)
    if (r.ok) ratios.push_back(r.var_over_lambda);
  if (ratios.size() >= 2) {
    bool down = ratios.back() < 0.8 * ratios.front();
    for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
      if (ratios[i + 1] > ratios[i]) down = false;
    if (down) {
      auto& last = out.back();
      const char* msg = "variance per volume drifts downward across the grid";
      last.note = last.note.empty() ? msg : last.note + "; " + msg;
    }
  }
  return out;
}

CltResult clt_scan(const ExperimentSpec& spec) {
  if (spec.lambdas.empty()) throw InvalidParams("clt_scan: empty grid");
  if (spec.n_reps < 100)
    throw InvalidParams("clt_scan: needs >= 100 replicates per level");
  constexpr int kBoot = 200;
  CltResult res;
  for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
    std::vector<double> w(spec.n_reps);
    parallel_for(spec.n_reps, spec.n_threads, [&](long r) {
      GibbsSample s = experiment_replicate(spec, li, r);
      w[r] = total_score(spec.score, s.config, s.config.window);
    });
    CltPoint pt;
    pt.lambda = spec.lambdas[li];
    pt.n_reps = spec.n_reps;
    pt.d_k = kolmogorov_distance(standardize(w));
    Rng boot(derive_seed(spec.seed, kBootStream, li));
    std::vector<double> bs(kBoot);
    std::vector<double> re(w.size());
    for (int b = 0; b < kBoot; ++b) {
      for (std::size_t i = 0; i < w.size(); ++i)
        re[i] = w[boot.uniform_index(static_cast<long>(w.size()))];
      try {
        bs[b] = kolmogorov_distance(standardize(re));
      } catch (const DegenerateVariance&) {
        bs[b] = 0.5;
      }
    }
    pt.d_k_se = std::sqrt(variance_of(bs));
    res.points.push_back(pt);
  }
  for (std::size_t i = 0; i + 1 < res.points.size(); ++i)
    if (res.points[i + 1].d_k > res.points[i].d_k) res.monotone = false;
  return res;
}

CPointEstimate estimate_c_point(const ExperimentSpec& spec) {
  require_stationary_score(spec, "estimate_c_point");
  if (spec.n_point < 2) throw InvalidParams("estimate_c_point: needs >= 2 samples");
  InsertionPlan plan = plan_insertion_window(spec, 0.0);
  const Point x0 = Point::zero(spec.dim);
  const long n = spec.n_point;
  std::vector<double> a(n), b(n);
  parallel_for(n, spec.n_threads, [&](long i) {
    std::uint64_t s = derive_seed(spec.seed, kInsStream,
                                  static_cast<std::uint64_t>(i));
    GibbsSample g = sample_gibbs(spec.pot, spec.tau, spec.beta, plan.window, s,
                                 spec.sampler);
    double mk = origin_mark(spec, derive_seed(s, kMarkStream, 0));
    ScoreResult sr = score_point(spec.score, x0, mk, g.config);
    double w = spec.beta == 0.0
                   ? 1.0
                   : weight_of(spec.beta, local_energy(spec.pot, x0, g.config));
    a[i] = sr.value * w;
    b[i] = sr.value * sr.value * w;
  });
  CPointEstimate e;
  e.c = mean_of(a);
  e.c_se = std::sqrt(variance_of(a) / static_cast<double>(n));
  e.c_sq = mean_of(b);
  e.c_sq_se = std::sqrt(variance_of(b) / static_cast<double>(n));
  e.window_side = plan.side;
  e.n = n;
  return e;
}

PairEstimate estimate_c_pair(const ExperimentSpec& spec, const Point& y) {
  require_stationary_score(spec, "estimate_c_pair");
  if (y.dim() != spec.dim) throw InvalidParams("estimate_c_pair: offset dimension");
  if (spec.n_pair < 2) throw InvalidParams("estimate_c_pair: needs >= 2 samples");
  InsertionPlan plan = plan_insertion_window(spec, norm(y));
  const Point x0 = Point::zero(spec.dim);
  const long n = spec.n_pair;
  std::vector<double> a(n), g(n);
  parallel_for(n, spec.n_threads, [&](long i) {
    std::uint64_t s = derive_seed(spec.seed, kInsStream,
                                  static_cast<std::uint64_t>(i));
    GibbsSample smp = sample_gibbs(spec.pot, spec.tau, spec.beta, plan.window, s,
                                   spec.sampler);
    double mk0 = origin_mark(spec, derive_seed(s, kMarkStream, 0));
    double mk1 = origin_mark(spec, derive_seed(s, kMarkStream, 1));
    ScoreResult s0 = score_point(spec.score, x0, mk0, smp.config);
    double w1 = spec.beta == 0.0
                    ? 1.0
                    : weight_of(spec.beta, local_energy(spec.pot, x0, smp.config));
    a[i] = s0.value * w1;
    PointConfiguration scratch = smp.config;
    // Empty samples carry no marks vector even when the score needs one.
    if (scratch.has_marks() || (spec.score.needs_marks() && scratch.size() == 0))
      scratch.add(y, mk1);
    else
      scratch.add(y);
    double v0 = score_point(spec.score, x0, mk0, scratch).value;
    set_scratch_point(scratch, x0, mk0);
    double v1 = score_point(spec.score, y, mk1, scratch).value;
    double w2 = spec.beta == 0.0
                    ? 1.0
                    : weight_of(spec.beta,
                                pair_insertion_energy(spec.pot, x0, y, smp.config));
    g[i] = v0 * v1 * w2;
  });
  const double abar = mean_of(a);
  const double gbar = mean_of(g);
  PairEstimate e;
  e.value = abar * abar - gbar;
  const double saa = variance_of(a);
  const double sgg = variance_of(g);
  const double sag = covariance_of(a, g);
  // Delta method for f(a, g) = a^2 - g, gradient (2 abar, -1).
  const double var = 4.0 * abar * abar * saa + sgg - 4.0 * abar * sag;
  e.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  e.window_side = plan.side;
  e.n = n;
  return e;
}

Sigma2Estimate estimate_sigma2(const ExperimentSpec& spec) {
  require_stationary_score(spec, "estimate_sigma2");
  if (spec.n_point < 2) throw InvalidParams("estimate_sigma2: needs >= 2 samples");
  if (spec.quad_nodes < 4)
    throw InvalidParams("estimate_sigma2: needs >= 4 quadrature nodes");
  const double r_cut =
      spec.quad_r_cut > 0.0 ? spec.quad_r_cut : 2.0 * (spec.pot.range() + 1.0);
  const int nodes = spec.quad_nodes;
  const double dr = r_cut / nodes;
  InsertionPlan plan = plan_insertion_window(spec, r_cut);
  const Point x0 = Point::zero(spec.dim);
  const long n = spec.n_point;
  std::vector<double> a(n), b(n);
  std::vector<double> gmat(static_cast<std::size_t>(n) * nodes);
  parallel_for(n, spec.n_threads, [&](long i) {
    std::uint64_t s = derive_seed(spec.seed, kInsStream,
                                  static_cast<std::uint64_t>(i));
    GibbsSample smp = sample_gibbs(spec.pot, spec.tau, spec.beta, plan.window, s,
                                   spec.sampler);
    double mk0 = origin_mark(spec, derive_seed(s, kMarkStream, 0));
    double mk1 = origin_mark(spec, derive_seed(s, kMarkStream, 1));
    ScoreResult s0 = score_point(spec.score, x0, mk0, smp.config);
    double w1 = spec.beta == 0.0
                    ? 1.0
                    : weight_of(spec.beta, local_energy(spec.pot, x0, smp.config));
    a[i] = s0.value * w1;
    b[i] = s0.value * s0.value * w1;
    PointConfiguration scratch = smp.config;
    if (scratch.has_marks() || (spec.score.needs_marks() && scratch.size() == 0))
      scratch.add(x0, mk1);
    else
      scratch.add(x0);
    for (int j = 0; j < nodes; ++j) {
      Point yj = Point::zero(spec.dim);
      yj[0] = (j + 0.5) * dr;
      set_scratch_point(scratch, yj, mk1);
      double v0 = score_point(spec.score, x0, mk0, scratch).value;
      set_scratch_point(scratch, x0, mk0);
      double v1 = score_point(spec.score, yj, mk1, scratch).value;
      double w2 = spec.beta == 0.0
                      ? 1.0
                      : weight_of(spec.beta, pair_insertion_energy(
                                                 spec.pot, x0, yj, smp.config));
      gmat[static_cast<std::size_t>(i) * nodes + j] = v0 * v1 * w2;
    }
  });
  const double abar = mean_of(a);
  const double bbar = mean_of(b);
  const double saa = variance_of(a);
  std::vector<double> gbar(nodes, 0.0), c_node(nodes, 0.0), se_node(nodes, 0.0);
  for (int j = 0; j < nodes; ++j) {
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += gmat[static_cast<std::size_t>(i) * nodes + j];
    gbar[j] = sum / static_cast<double>(n);
  }
  for (int j = 0; j < nodes; ++j) {
    double sgg = 0.0, sag = 0.0;
    for (long i = 0; i < n; ++i) {
      const double dg = gmat[static_cast<std::size_t>(i) * nodes + j] - gbar[j];
      sgg += dg * dg;
      sag += (a[i] - abar) * dg;
    }
    sgg /= static_cast<double>(n - 1);
    sag /= static_cast<double>(n - 1);
    c_node[j] = abar * abar - gbar[j];
    const double var = 4.0 * abar * abar * saa + sgg - 4.0 * abar * sag;
    se_node[j] = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  const double vd = ball_volume(spec.dim, 1.0);
  std::vector<double> wq(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double rj = (j + 0.5) * dr;
    wq[j] = spec.dim * vd * std::pow(rj, spec.dim - 1) * dr;
  }
  // The integrand is kept until it is indistinguishable from zero at two
  // consecutive nodes; everything from the first such node on is dropped.
  int stop = -1;
  bool prev_negligible = false;
  for (int j = 0; j < nodes; ++j) {
    const bool negligible =
        std::abs(c_node[j]) <= 1e-4 * std::abs(bbar) + 2.0 * se_node[j];
    if (negligible && prev_negligible) {
      stop = j - 1;
      break;
    }
    prev_negligible = negligible;
  }
  if (stop < 0)
    throw DecayNotDetected(
        "pair correlation never became negligible before the cutoff");
  double w_tot = 0.0;
  for (int j = 0; j < stop; ++j) w_tot += wq[j];
  std::vector<double> u(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < stop; ++j)
      acc += wq[j] * gmat[static_cast<std::size_t>(i) * nodes + j];
    u[i] = acc;
  }
  const double ubar = mean_of(u);
  Sigma2Estimate e;
  e.value = bbar - spec.tau * (w_tot * abar * abar - ubar);
  e.c_point = abar;
  e.c_sq = bbar;
  e.nodes_used = stop;
  e.r_stop = stop * dr;
  e.window_side = plan.side;
  e.n = n;
  {
    // Delta method over (abar, bbar, ubar), gradient (-2 tau W a, 1, tau).
    const double sbb = variance_of(b);
    const double suu = variance_of(u);
    const double sab = covariance_of(a, b);
    const double sau = covariance_of(a, u);
    const double sbu = covariance_of(b, u);
    const double ga = -2.0 * spec.tau * w_tot * abar;
    const double gb = 1.0;
    const double gu = spec.tau;
    double var = ga * ga * saa + gb * gb * sbb + gu * gu * suu +
                 2.0 * ga * gb * sab + 2.0 * ga * gu * sau + 2.0 * gb * gu * sbu;
    e.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  {
    // Tail allowance beyond r_stop: integrate the fitted exponential decay
    // of |c| when a fit is possible, otherwise charge the negligibility
    // threshold over the remaining shell up to the cutoff.
    std::vector<double> xs, ys;
    for (int j = 0; j < stop; ++j) {
      if (std::abs(c_node[j]) > 0.0) {
        xs.push_back((j + 0.5) * dr);
        ys.push_back(std::log(std::abs(c_node[j])));
      }
    }
    LineFit fit = fit_line(xs, ys);
    if (xs.size() >= 3 && fit.slope < 0.0) {
      const double b_decay = -fit.slope;
      const double amp = std::exp(fit.intercept);
      const double r_end = e.r_stop + 40.0 / b_decay;
      const int steps = 2000;
      const double h = (r_end - e.r_stop) / steps;
      double acc = 0.0;
      for (int m = 0; m < steps; ++m) {
        const double r = e.r_stop + (m + 0.5) * h;
        acc += amp * std::exp(-b_decay * r) * spec.dim * vd *
               std::pow(r, spec.dim - 1) * h;
      }
      e.tail_bound = spec.tau * acc;
    } else {
      double acc = 0.0;
      for (int j = stop; j < nodes; ++j)
        acc += wq[j] * (1e-4 * std::abs(bbar) + 2.0 * se_node[j]);
      e.tail_bound = spec.tau * acc;
    }
  }
  return e;
}

TailEstimate tail_estimate(TailMode mode, const ExperimentSpec& spec,
                           const std::vector<double>& grid, bool require_fit) {
  if (grid.empty()) throw InvalidParams("tail_estimate: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i > 0 && grid[i] <= grid[i - 1]))
      throw InvalidParams("tail_estimate: grid must be ascending, nonnegative");
  }
  if (spec.lambdas.empty()) throw InvalidParams("tail_estimate: empty lambda grid");
  if (spec.n_reps < 1) throw InvalidParams("tail_estimate: needs replicates");
  const std::size_t li = spec.lambdas.size() - 1;
  const long n_reps = spec.n_reps;
  const bool radius_mode = mode == TailMode::kStabilizationRadius;
  std::vector<std::vector<double>> vals(n_reps);
  std::vector<double> ins_radius(n_reps, 0.0), ins_weight(n_reps, 0.0);
  const Point x0 = Point::zero(spec.dim);
  parallel_for(n_reps, spec.n_threads, [&](long r) {
    GibbsSample s = experiment_replicate(spec, li, r);
    if (!radius_mode) {
      vals[r] = s.clan_diameter;
      return;
    }
    std::vector<ScoreResult> res = score_all(spec.score, s.config);
    std::vector<double> v;
    v.reserve(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
      if (spec.score.kind == ScoreKind::kMaximalPoint &&
          !in_region(spec.score.region, spec.score.region_lambda,
                     s.config.points[i]))
        continue;
      v.push_back(res[i].radius);
    }
    vals[r] = std::move(v);
    std::uint64_t ts = derive_seed(spec.seed, kTailStream,
                                   static_cast<std::uint64_t>(r));
    double mk = origin_mark(spec, derive_seed(ts, kMarkStream));
    ScoreResult sr = score_point(spec.score, x0, mk, s.config);
    ins_radius[r] = sr.radius;
    ins_weight[r] =
        spec.beta == 0.0
            ? 1.0
            : weight_of(spec.beta, local_energy(spec.pot, x0, s.config));
  });
  std::vector<double> pooled;
  for (const auto& v : vals) pooled.insert(pooled.end(), v.begin(), v.end());
  TailEstimate out;
  out.grid = grid;
  out.n_points = static_cast<long>(pooled.size());
  const std::size_t npool = pooled.size();
  out.survival.resize(grid.size());
  out.se.resize(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) {
    std::size_t over = 0;
    for (double v : pooled)
      if (v > grid[t]) ++over;
    const double p = npool == 0 ? 0.0
                                : static_cast<double>(over) /
                                      static_cast<double>(npool);
    out.survival[t] = p;
    out.se[t] = npool == 0 ? 0.0 : binomial_se(p, npool);
  }
  if (radius_mode) {
    double wsum = 0.0, wsq = 0.0;
    for (long r = 0; r < n_reps; ++r) {
      wsum += ins_weight[r];
      wsq += ins_weight[r] * ins_weight[r];
    }
    out.w_survival.resize(grid.size());
    out.w_se.resize(grid.size());
    const double n_eff = wsq > 0.0 ? wsum * wsum / wsq : 0.0;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      double acc = 0.0;
      for (long r = 0; r < n_reps; ++r)
        if (ins_radius[r] > grid[t]) acc += ins_weight[r];
      const double p = wsum > 0.0 ? acc / wsum : 0.0;
      out.w_survival[t] = p;
      out.w_se[t] =
          n_eff > 0.0 ? binomial_se(p, static_cast<std::size_t>(n_eff)) : 0.0;
    }
  } else {
    out.w_survival = out.survival;
    out.w_se = out.se;
  }
  auto fit_window = [&](const std::vector<double>& surv, LineFit* fit) {
    std::vector<double> xs, ys;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      if (surv[t] >= 1e-3 && surv[t] <= 0.5) {
        xs.push_back(grid[t]);
        ys.push_back(std::log(surv[t]));
      }
    }
    if (xs.size() < 3) return false;
    *fit = fit_line(xs, ys);
    return true;
  };
  out.fit_ok = fit_window(out.survival, &out.fit);
  out.w_fit_ok = fit_window(out.w_survival, &out.w_fit);
  if (require_fit && !out.fit_ok)
    throw InsufficientTail(
        "fewer than 3 grid points with survival in [1e-3, 0.5]");
  return out;
}

std::vector<MismatchPoint> truncation_mismatch(
    const ExperimentSpec& spec, const std::vector<double>& rho_grid) {
  if (rho_grid.empty()) throw InvalidParams("truncation_mismatch: empty grid");
  if (spec.lambdas.empty())
    throw InvalidParams("truncation_mismatch: empty lambda grid");
  if (spec.n_reps < 1) throw InvalidParams("truncation_mismatch: needs reps");
  const std::size_t li = spec.lambdas.size() - 1;
  const long n_reps = spec.n_reps;
  std::vector<std::vector<char>> differ(rho_grid.size(),
                                        std::vector<char>(n_reps, 0));
  parallel_for(n_reps, spec.n_threads, [&](long r) {
    GibbsSample s = experiment_replicate(spec, li, r);
    const double w = total_score(spec.score, s.config, s.config.window);
    for (std::size_t q = 0; q < rho_grid.size(); ++q) {
      const double wq = truncated_total(spec.score, s, rho_grid[q]);
      differ[q][r] = (w != wq) ? 1 : 0;
    }
  });
  std::vector<MismatchPoint> out;
  for (std::size_t q = 0; q < rho_grid.size(); ++q) {
    long bad = 0;
    for (long r = 0; r < n_reps; ++r) bad += differ[q][r];
    MismatchPoint pt;
    pt.rho = rho_grid[q];
    pt.fraction = static_cast<double>(bad) / static_cast<double>(n_reps);
    pt.se = binomial_se(pt.fraction, static_cast<std::size_t>(n_reps));
    out.push_back(pt);
  }
  return out;
}

ProbeEstimate conditional_variance_probe(const ExperimentSpec& spec,
                                         double r_volume, double t_volume,
                                         long n_outer, long n_inner) {
  if (!(r_volume > 0.0) || t_volume < r_volume)
    throw InvalidParams("probe: needs t_volume >= r_volume > 0");
  if (n_outer < 2 || n_inner < 2)
    throw InvalidParams("probe: needs >= 2 outer and inner replicates");
  double reach = 0.0;
  switch (spec.score.kind) {
    case ScoreKind::kConstant:
      reach = 0.0;
      break;
    case ScoreKind::kClique:
      reach = spec.score.s;
      break;
    default:
      throw DomainError(
          "conditional variance probe needs a score with a fixed "
          "stabilization radius (constant or clique)");
  }
  const int d = spec.dim;
  const double side_t = std::pow(t_volume, 1.0 / d);
  const double buffer = spec.pot.range() + reach + 1.0;
  const double side_outer = side_t + 2.0 * buffer;
  Window outer_win =
      Window::cube(std::pow(side_outer, d), d, Boundary::kFree);
  Window q_r = Window::cube(r_volume, d, Boundary::kFree);
  Window q_t = Window::cube(t_volume, d, Boundary::kFree);
  std::vector<double> var_outer(n_outer);
  parallel_for(n_outer, spec.n_threads, [&](long o) {
    std::uint64_t os = derive_seed(spec.seed, kOuterStream,
                                   static_cast<std::uint64_t>(o));
    GibbsSample full = sample_gibbs(spec.pot, spec.tau, spec.beta, outer_win,
                                    os, spec.sampler);
    PointConfiguration base;
    base.window = outer_win;
    const bool marked = full.config.has_marks();
    for (std::size_t i = 0; i < full.config.size(); ++i) {
      if (q_r.contains(full.config.points[i])) continue;
      if (marked)
        base.add(full.config.points[i], full.config.marks[i]);
      else
        base.add(full.config.points[i]);
    }
    std::vector<double> sums(n_inner);
    for (long m = 0; m < n_inner; ++m) {
      std::uint64_t is = derive_seed(spec.seed, kInnerStream,
                                     static_cast<std::uint64_t>(o),
                                     static_cast<std::uint64_t>(m));
      PointConfiguration inner = sample_conditional(
          spec.pot, spec.tau, spec.beta, full.config, q_r, ChainOptions{}, is);
      PointConfiguration comp = base;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        if (marked)
          comp.add(inner.points[i], inner.has_marks() ? inner.marks[i] : 0.0);
        else
          comp.add(inner.points[i]);
      }
      std::vector<ScoreResult> res = score_all(spec.score, comp);
      double acc = 0.0;
      for (std::size_t i = 0; i < comp.size(); ++i)
        if (q_t.contains(comp.points[i])) acc += res[i].value;
      sums[m] = acc;
    }
    var_outer[o] = variance_of(sums);
  });
  ProbeEstimate e;
  e.value = mean_of(var_outer);
  e.se = std::sqrt(variance_of(var_outer) / static_cast<double>(n_outer));
  e.n_outer = n_outer;
  e.n_inner = n_inner;
  return e;
}

double resolve_rho_c(const ExperimentSpec& spec, std::string* note) {
  auto set_note = [&](const std::string& s) {
    if (note) *note = s;
  };
  if (spec.beta == 0.0) {
    set_note("beta = 0: clans are empty, truncation is exact at any rho");
    return 0.0;
  }
  if (spec.lambdas.empty())
    throw InvalidParams("resolve_rho_c: needs a lambda grid");
  const double lambda_max = spec.lambdas.back();
  const long n_pilot = std::max<long>(1, std::min<long>(spec.n_reps, 200));
  Window win = Window::cube(lambda_max, spec.dim, spec.boundary);
  std::vector<std::vector<double>> diam(n_pilot);
  std::vector<std::size_t> counts(n_pilot, 0);
  parallel_for(n_pilot, spec.n_threads, [&](long r) {
    std::uint64_t s = derive_seed(spec.seed, kRhoStream,
                                  static_cast<std::uint64_t>(r));
    GibbsSample g = sample_gibbs(spec.pot, spec.tau, spec.beta, win, s,
                                 spec.sampler);
    diam[r] = composed_clan_diameters(spec.score, g);
    counts[r] = g.config.size();
  });
  std::vector<double> pooled;
  std::size_t total = 0;
  for (long r = 0; r < n_pilot; ++r) {
    pooled.insert(pooled.end(), diam[r].begin(), diam[r].end());
    total += counts[r];
  }
  const double tau_hat =
      static_cast<double>(total) / (static_cast<double>(n_pilot) * lambda_max);
  double dmax = 0.0;
  for (double v : pooled) dmax = std::max(dmax, v);
  if (!(dmax > 0.0) || pooled.empty()) {
    set_note("no positive clan diameters in the pilot; rho rule inactive");
    return 0.0;
  }
  const std::size_t npool = pooled.size();
  std::vector<double> xs, ys;
  constexpr int kGrid = 48;
  for (int j = 1; j <= kGrid; ++j) {
    const double t = dmax * j / kGrid;
    std::size_t over = 0;
    for (double v : pooled)
      if (v > t) ++over;
    const double s = static_cast<double>(over) / static_cast<double>(npool);
    if (s >= 1e-3 && s <= 0.5) {
      xs.push_back(t);
      ys.push_back(std::log(s));
    }
  }
  LineFit fit = fit_line(xs, ys);
  if (xs.size() < 3 || fit.slope >= 0.0) {
    set_note("clan tail fit unavailable; rho coefficient fixed at 1");
    return 1.0;
  }
  const double amp = std::exp(fit.intercept);
  const double decay = -fit.slope;
  double c = 0.0;
  for (double lambda : spec.lambdas) {
    if (lambda <= 1.0) continue;
    const double need =
        std::log(1000.0 * amp * std::max(tau_hat, 1e-12) * lambda) /
        (decay * std::log(lambda));
    c = std::max(c, need);
  }
  c = std::max(c, 0.0);
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "rho = %.4g ln(lambda), calibrated from the clan-tail pilot", c);
  set_note(buf);
  return c;
}

}  // namespace gibbsgeom
