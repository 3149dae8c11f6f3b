#include "gibbsgeom/scores.hpp"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace gibbsgeom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest distance realizable on a flat torus: half the side per axis.
double torus_max_distance(const Window& w) {
  double s2 = 0.0;
  for (int a = 0; a < w.dim(); ++a) {
    double h = w.side[a] / 2.0;
    s2 += h * h;
  }
  return std::sqrt(s2);
}

// Number of k-subsets of cand (positions) that are pairwise within s and,
// together with the implicit center point, form a clique. cand must already
// be filtered to points within s of the center.
std::uint64_t count_clique_extensions(const std::vector<Point>& cand, int k,
                                      double s2, const Window& metric) {
  if (k == 1) return cand.size();
  std::size_t m = cand.size();
  if (m < static_cast<std::size_t>(k)) return 0;
  std::uint64_t count = 0;
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  // DFS over index-increasing subsets; every new member must be compatible
  // with all previously chosen ones.
  auto rec = [&](auto&& self, std::size_t start, int need) -> void {
    if (need == 0) {
      ++count;
      return;
    }
    for (std::size_t t = start; t < m; ++t) {
      if (m - t < static_cast<std::size_t>(need)) break;
      bool ok = true;
      for (std::size_t c : chosen) {
        if (metric.distance2(cand[t], cand[c]) > s2) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      chosen.push_back(t);
      self(self, t + 1, need - 1);
      chosen.pop_back();
    }
  };
  rec(rec, 0, k);
  return count;
}

std::uint64_t clique_count_at(const Point& x, const PointConfiguration& rest,
                              int k, double s) {
  double s2 = s * s;
  std::vector<Point> cand;
  for (const Point& y : rest.points) {
    if (rest.window.distance2(x, y) <= s2) cand.push_back(y);
  }
  return count_clique_extensions(cand, k, s2, rest.window);
}

// ---------------------------------------------------------------------------
// kNN length score.
//
// The undirected kNN graph has edge {x,y} when either endpoint ranks among
// the other's k nearest; ranks order by (distance, index) so the evaluation
// is deterministic under ties. Index order is the position of the point in
// `rest`, with x itself ranked last.

struct KnnEdges {
  std::vector<std::size_t> partners;  // indices into rest, ascending
  double d_k = 0.0;                   // distance to x's k-th nearest (0 if < k others)
  double max_in_edge = 0.0;           // largest |wx| over w with x in kNN(w)
};

std::vector<std::size_t> k_nearest_of(const std::vector<Point>& pts,
                                      const Window& metric, const Point& from,
                                      std::size_t self, int k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == self) continue;
    d.emplace_back(metric.distance2(from, pts[j]), j);
  }
  std::size_t kk = std::min<std::size_t>(k, d.size());
  std::partial_sort(d.begin(), d.begin() + kk, d.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t t = 0; t < kk; ++t) out[t] = d[t].second;
  return out;
}

KnnEdges knn_edges(const Point& x, const PointConfiguration& rest, int k) {
  const std::vector<Point>& pts = rest.points;
  std::size_t n = pts.size();
  KnnEdges e;
  if (n == 0) return e;

  std::vector<std::size_t> out_edges =
      k_nearest_of(pts, rest.window, x, n, k);  // self index n: never matches
  std::vector<char> partner(n, 0);
  for (std::size_t j : out_edges) partner[j] = 1;
  if (!out_edges.empty()) {
    std::size_t last = out_edges.back();
    e.d_k = rest.window.distance(x, pts[last]);
    // partial_sort leaves out_edges ordered by distance; the k-th is last.
  }
  if (out_edges.size() < static_cast<std::size_t>(k)) e.d_k = 0.0;

  // In-edges: x ranks among w's k nearest, where w's candidate set is the
  // rest of `rest` plus x (x carries the largest index).
  for (std::size_t w = 0; w < n; ++w) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == w) continue;
      d.emplace_back(rest.window.distance2(pts[w], pts[j]), j);
    }
    d.emplace_back(rest.window.distance2(pts[w], x), n);
    std::size_t kk = std::min<std::size_t>(k, d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    for (std::size_t t = 0; t < kk; ++t) {
      if (d[t].second == n) {
        partner[w] = 1;
        e.max_in_edge =
            std::max(e.max_in_edge, rest.window.distance(x, pts[w]));
        break;
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (partner[j]) e.partners.push_back(j);
  }
  return e;
}

// Certified bound on insertions gaining an in-edge to x. A new point z can
// adopt x as a k-nearest neighbor only while fewer than k existing points
// are strictly closer to z than x is. The set of such z is star-shaped from
// x (balls B(x + Du, D) are nested in D along each ray), so it suffices to
// find a radius D at which every direction already sees k strictly closer
// points; all z beyond D are then unaffected. The per-direction count is a
// coverage depth of circular arcs, checked exactly at the arc breakpoints.
// Returns infinity when no such radius exists (e.g. fewer than k points on
// some side), which is the honest answer: those scores never stabilize.
double knn_gain_bound_1d(const Point& x, const std::vector<Point>& pts, int k,
                         double d0, double cap) {
  double D = std::max(d0, 1e-12);
  while (D <= cap) {
    int pos = 0;
    int neg = 0;
    for (const Point& y : pts) {
      double t = y[0] - x[0];
      if (t > 0.0 && t < 2.0 * D) ++pos;
      if (t < 0.0 && -t < 2.0 * D) ++neg;
    }
    if (pos >= k && neg >= k) return D;
    D *= 2.0;
  }
  return kInf;
}

double knn_gain_bound_2d(const Point& x, const std::vector<Point>& pts, int k,
                         double d0, double cap) {
  double D = std::max(d0, 1e-12);
  std::vector<double> angles;
  while (D <= cap) {
    // Arc for y: directions u with u.(y-x) > |y-x|^2 / (2D); half-width
    // acos(|y-x| / 2D) about the direction of y.
    angles.clear();
    std::vector<std::pair<Point, double>> active;  // (offset, threshold)
    for (const Point& y : pts) {
      double dx = y[0] - x[0];
      double dy = y[1] - x[1];
      double r2 = dx * dx + dy * dy;
      if (r2 <= 0.0) continue;  // coincident point is never strictly closer
      double r = std::sqrt(r2);
      if (r >= 2.0 * D) continue;
      Point off(2);
      off[0] = dx;
      off[1] = dy;
      active.emplace_back(off, r2 / (2.0 * D));
      double psi = std::atan2(dy, dx);
      double alpha = std::acos(std::min(1.0, r / (2.0 * D)));
      angles.push_back(psi - alpha);
      angles.push_back(psi + alpha);
      // Probe just inside/outside each breakpoint as well; depth is
      // piecewise constant and open at arc endpoints.
      angles.push_back(psi - alpha - 1e-9);
      angles.push_back(psi + alpha + 1e-9);
    }
    if (static_cast<int>(active.size()) >= k) {
      std::sort(angles.begin(), angles.end());
      std::vector<double> probes = angles;
      for (std::size_t t = 0; t + 1 < angles.size(); ++t) {
        probes.push_back(0.5 * (angles[t] + angles[t + 1]));
      }
      if (!angles.empty()) {
        probes.push_back(0.5 * (angles.front() + angles.back()) + M_PI);
      }
      bool covered = true;
      for (double th : probes) {
        double cx = std::cos(th);
        double sx = std::sin(th);
        int depth = 0;
        for (const auto& [off, thr] : active) {
          if (cx * off[0] + sx * off[1] > thr) ++depth;
        }
        if (depth < k) {
          covered = false;
          break;
        }
      }
      if (covered) return D;
    }
    D *= 2.0;
  }
  return kInf;
}

double knn_radius(const Point& x, const PointConfiguration& rest, int k,
                  const KnnEdges& e) {
  if (rest.window.boundary == Boundary::kPeriodic) {
    // On a torus every insertion position is within the maximal distance;
    // reporting it makes the radius sound without a directional search.
    return torus_max_distance(rest.window);
  }
  double d0 = std::max(e.d_k, 2.0 * e.max_in_edge);
  double cap =
      1048576.0 * std::max({rest.window.diameter(), e.d_k, 1.0});
  double gain;
  int d = x.dim();
  if (d == 1) {
    gain = knn_gain_bound_1d(x, rest.points, k, std::max(d0, 1.0e-9), cap);
  } else if (d == 2) {
    gain = knn_gain_bound_2d(x, rest.points, k, std::max(d0, 1.0e-9), cap);
  } else {
    gain = kInf;  // no certified directional covering implemented beyond d=2
  }
  return std::max(d0, gain);
}

// ---------------------------------------------------------------------------
// Maximal point score.

double region_height(const RegionA& region, double L, const Point& x) {
  int d = x.dim();
  if (d <= 1) return L * region.offset;
  double sum = 0.0;
  for (int i = 0; i + 1 < d; ++i) sum += x[i];
  return L * region.offset + region.slope * (sum / (d - 1));
}

bool dominates(const Point& y, const Point& x) {
  for (int i = 0; i < x.dim(); ++i) {
    if (y[i] < x[i]) return false;
  }
  return !(y == x);
}

// Farthest point of {z in scaled region : z >= x coordinatewise} from x.
// The set is a prism over B = (coordinate box) n {sum v_i <= c_sum} capped
// below by x_d and above by the graph plane; its extreme points sit over
// the vertices of B, so the maximum distance is attained there.
double orthant_reach(const RegionA& region, double L, const Point& x) {
  int d = x.dim();
  int m = d - 1;
  double w0 = x[d - 1];
  if (m == 0) return L * region.offset - w0;

  double c_sum = static_cast<double>(m) * (w0 - L * region.offset) / region.slope;
  std::vector<std::vector<double>> verts;

  std::vector<double> v(m);
  // Box corners satisfying the sum constraint.
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      v[i] = (mask >> i & 1u) ? L : x[i];
      s += v[i];
    }
    if (s <= c_sum) verts.push_back(v);
  }
  // Intersections of the constraint plane with box edges.
  for (int j = 0; j < m; ++j) {
    for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
      double s = 0.0;
      int bit = 0;
      for (int i = 0; i < m; ++i) {
        if (i == j) continue;
        v[i] = (mask >> bit & 1u) ? L : x[i];
        s += v[i];
        ++bit;
      }
      double t = c_sum - s;
      if (t > x[j] && t < L) {
        v[j] = t;
        verts.push_back(v);
      }
    }
  }

  double best2 = 0.0;
  for (const auto& vv : verts) {
    double base2 = 0.0;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      double di = vv[i] - x[i];
      base2 += di * di;
      sum += vv[i];
    }
    double top = L * region.offset + region.slope * (sum / m);
    for (double w : {w0, std::max(top, w0)}) {
      double dw = w - w0;
      best2 = std::max(best2, base2 + dw * dw);
    }
  }
  return std::sqrt(best2);
}

// ---------------------------------------------------------------------------

void require_marks(const PointConfiguration& c) {
  if (!c.points.empty() && c.marks.size() != c.points.size()) {
    throw MissingMarks("configuration lacks per-point marks");
  }
}

double euclid(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Per-point values plus the integer clique counts backing them, so totals
// can divide by k+1 once instead of per term.
struct Scored {
  std::vector<ScoreResult> results;
  std::vector<std::uint64_t> counts;  // clique only
  bool integer_path = false;
};

Scored score_all_impl(const ScoreSpec& spec, const PointConfiguration& config);

}  // namespace

RegionA region_a(double offset, double slope) {
  if (!(offset > 0.0) || offset > 1.0) {
    throw InvalidParams("region offset must lie in (0, 1]");
  }
  if (!(slope <= -1.0 / 64.0) || !(slope >= -8.0)) {
    throw InvalidParams("region slope must lie in [-8, -1/64]");
  }
  if (offset + slope < 0.0) {
    throw InvalidParams("region height must stay nonnegative over the base");
  }
  RegionA r;
  r.offset = offset;
  r.slope = slope;
  return r;
}

bool in_region(const RegionA& region, double region_lambda, const Point& x) {
  int d = x.dim();
  double L = std::pow(region_lambda, 1.0 / d);
  for (int i = 0; i + 1 < d; ++i) {
    if (x[i] < 0.0 || x[i] > L) return false;
  }
  double w = x[d - 1];
  if (w < 0.0) return false;
  return w <= region_height(region, L, x);
}

ScoreSpec ScoreSpec::constant(double value) {
  if (value < 0.0) throw InvalidParams("constant score must be nonnegative");
  ScoreSpec s;
  s.kind = ScoreKind::kConstant;
  s.value = value;
  return s;
}

ScoreSpec ScoreSpec::clique(int k, double s) {
  if (k < 1) throw InvalidParams("clique order k must be >= 1");
  if (!(s > 0.0)) throw InvalidParams("clique threshold s must be positive");
  ScoreSpec sp;
  sp.kind = ScoreKind::kClique;
  sp.k = k;
  sp.s = s;
  return sp;
}

ScoreSpec ScoreSpec::knn_length(int k) {
  if (k < 1) throw InvalidParams("knn k must be >= 1");
  ScoreSpec sp;
  sp.kind = ScoreKind::kKnnLength;
  sp.k = k;
  return sp;
}

ScoreSpec ScoreSpec::voronoi_length() {
  ScoreSpec sp;
  sp.kind = ScoreKind::kVoronoiLength;
  return sp;
}

ScoreSpec ScoreSpec::maximal(const RegionA& region, double region_lambda) {
  if (!(region_lambda > 0.0)) throw InvalidParams("region scale must be positive");
  ScoreSpec sp;
  sp.kind = ScoreKind::kMaximalPoint;
  sp.region = region_a(region.offset, region.slope);
  sp.region_lambda = region_lambda;
  return sp;
}

ScoreSpec ScoreSpec::birth_growth(double speed) {
  if (!(speed > 0.0)) throw InvalidParams("growth speed must be positive");
  ScoreSpec sp;
  sp.kind = ScoreKind::kBirthGrowth;
  sp.speed = speed;
  return sp;
}

ScoreSpec ScoreSpec::insurance(int k, double cap) {
  if (k < 1) throw InvalidParams("insurance k must be >= 1");
  if (!(cap > 0.0)) throw InvalidParams("insurance cap must be positive");
  ScoreSpec sp;
  sp.kind = ScoreKind::kInsuranceClaim;
  sp.k = k;
  sp.cap = cap;
  return sp;
}

ScoreResult score_point(const ScoreSpec& spec, const Point& x, double mark_x,
                        const PointConfiguration& rest) {
  if (x.dim() != rest.window.dim()) {
    throw InvalidParams("point dimension does not match the window");
  }
  ScoreResult out;
  switch (spec.kind) {
    case ScoreKind::kConstant: {
      out.value = spec.value;
      out.radius = 0.0;
      return out;
    }
    case ScoreKind::kClique: {
      std::uint64_t c = clique_count_at(x, rest, spec.k, spec.s);
      out.value = static_cast<double>(c) / (spec.k + 1);
      out.radius = spec.s;
      return out;
    }
    case ScoreKind::kKnnLength: {
      KnnEdges e = knn_edges(x, rest, spec.k);
      double sum = 0.0;
      for (std::size_t j : e.partners) {
        sum += rest.window.distance(x, rest.points[j]);
      }
      out.value = 0.5 * sum;
      out.radius = knn_radius(x, rest, spec.k, e);
      return out;
    }
    case ScoreKind::kVoronoiLength: {
      VoronoiCell cell = voronoi_cell_of(x, rest);
      out.value = 0.5 * finite_edge_length(cell);
      out.radius = cell.enclosed ? cell.radius : kInf;
      return out;
    }
    case ScoreKind::kMaximalPoint: {
      int d = x.dim();
      double L = std::pow(spec.region_lambda, 1.0 / d);
      if (!in_region(spec.region, spec.region_lambda, x)) {
        throw DomainError("point outside the scaled region");
      }
      double nearest_dom = kInf;
      for (const Point& y : rest.points) {
        if (!in_region(spec.region, spec.region_lambda, y)) continue;
        if (dominates(y, x)) nearest_dom = std::min(nearest_dom, euclid(y, x));
      }
      if (std::isfinite(nearest_dom)) {
        out.value = 0.0;
        out.radius = nearest_dom;
      } else {
        out.value = 1.0;
        out.radius = orthant_reach(spec.region, L, x);
      }
      return out;
    }
    case ScoreKind::kBirthGrowth: {
      require_marks(rest);
      double nearest_block = kInf;
      for (std::size_t j = 0; j < rest.points.size(); ++j) {
        double dist = rest.window.distance(x, rest.points[j]);
        if (rest.marks[j] <= mark_x - dist / spec.speed) {
          nearest_block = std::min(nearest_block, dist);
        }
      }
      if (std::isfinite(nearest_block)) {
        out.value = 0.0;
        out.radius = nearest_block;
      } else {
        out.value = 1.0;
        out.radius = spec.speed * mark_x;
      }
      return out;
    }
    case ScoreKind::kInsuranceClaim: {
      require_marks(rest);
      std::size_t n = rest.points.size();
      if (n < static_cast<std::size_t>(spec.k)) {
        out.value = 0.0;  // fewer than k neighbors: claim 0 by convention
        out.radius = kInf;
        return out;
      }
      std::vector<double> d2;
      d2.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        double sp2 = rest.window.distance2(x, rest.points[j]);
        double dt = mark_x - rest.marks[j];
        d2.push_back(sp2 + dt * dt);
      }
      std::nth_element(d2.begin(), d2.begin() + (spec.k - 1), d2.end());
      double dk = std::sqrt(d2[spec.k - 1]);
      out.value = std::min(spec.cap, dk);
      out.radius = dk;
      return out;
    }
  }
  throw InvalidParams("unknown score kind");
}

namespace {

Scored score_all_impl(const ScoreSpec& spec, const PointConfiguration& config) {
  Scored sc;
  std::size_t n = config.size();
  sc.results.resize(n);
  if (n == 0) {
    sc.integer_path = spec.kind == ScoreKind::kClique;
    return sc;
  }

  if (spec.kind == ScoreKind::kConstant) {
    for (auto& r : sc.results) {
      r.value = spec.value;
      r.radius = 0.0;
    }
    return sc;
  }

  if (spec.kind == ScoreKind::kClique) {
    sc.integer_path = true;
    sc.counts.resize(n, 0);
    NeighborIndex idx(config);
    double s2 = spec.s * spec.s;
    std::vector<Point> cand;
    for (std::size_t i = 0; i < n; ++i) {
      auto ids =
          idx.neighbors_within(config.points[i], spec.s, static_cast<long>(i));
      cand.clear();
      for (auto j : ids) cand.push_back(config.points[j]);
      std::uint64_t c =
          count_clique_extensions(cand, spec.k, s2, config.window);
      sc.counts[i] = c;
      sc.results[i].value = static_cast<double>(c) / (spec.k + 1);
      sc.results[i].radius = spec.s;
    }
    return sc;
  }

  if (spec.kind == ScoreKind::kMaximalPoint) {
    // Points outside the region are not scored (the total ranges over the
    // region); mark them zero so callers can still index by position.
    PointConfiguration rest;
    rest.window = config.window;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_region(spec.region, spec.region_lambda, config.points[i])) {
        sc.results[i] = ScoreResult{0.0, 0.0, false};
        continue;
      }
      rest.points.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) rest.points.push_back(config.points[j]);
      }
      sc.results[i] = score_point(spec, config.points[i], 0.0, rest);
    }
    return sc;
  }

  bool marked = spec.needs_marks();
  if (marked) require_marks(config);
  PointConfiguration rest;
  rest.window = config.window;
  for (std::size_t i = 0; i < n; ++i) {
    rest.points.clear();
    rest.marks.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      rest.points.push_back(config.points[j]);
      if (marked) rest.marks.push_back(config.marks[j]);
    }
    double mark_x = marked ? config.marks[i] : 0.0;
    sc.results[i] = score_point(spec, config.points[i], mark_x, rest);
  }
  return sc;
}

bool include_in_total(const ScoreSpec& spec, const Point& x,
                      const Window& window) {
  if (spec.kind == ScoreKind::kMaximalPoint) {
    return in_region(spec.region, spec.region_lambda, x);
  }
  return window.contains(x);
}

double total_from(const ScoreSpec& spec, const PointConfiguration& config,
                  const Window& window, const Scored& sc,
                  const std::vector<char>* keep) {
  if (sc.integer_path) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (keep && !(*keep)[i]) continue;
      if (!include_in_total(spec, config.points[i], window)) continue;
      total += sc.counts[i];
    }
    return static_cast<double>(total) / (spec.k + 1);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (keep && !(*keep)[i]) continue;
    if (!include_in_total(spec, config.points[i], window)) continue;
    total += sc.results[i].value;
  }
  return total;
}

}  // namespace

std::vector<ScoreResult> score_all(const ScoreSpec& spec,
                                   const PointConfiguration& config) {
  return score_all_impl(spec, config).results;
}

std::uint64_t clique_total_count(int k, double s,
                                 const PointConfiguration& config) {
  if (config.size() == 0) return 0;
  NeighborIndex idx(config);
  double s2 = s * s;
  std::uint64_t total = 0;
  std::vector<Point> cand;
  for (std::size_t i = 0; i < config.size(); ++i) {
    auto ids = idx.neighbors_within(config.points[i], s, static_cast<long>(i));
    cand.clear();
    for (auto j : ids) {
      if (j > i) cand.push_back(config.points[j]);  // count each clique once
    }
    total += count_clique_extensions(cand, k, s2, config.window);
  }
  return total;
}

double total_score(const ScoreSpec& spec, const PointConfiguration& config,
                   const Window& window) {
  Scored sc = score_all_impl(spec, config);
  return total_from(spec, config, window, sc, nullptr);
}

std::vector<double> composed_clan_diameters(const ScoreSpec& spec,
                                            const GibbsSample& sample) {
  const PointConfiguration& config = sample.config;
  std::size_t n = config.size();
  if (sample.clan_points.size() != n || sample.clan_diameter.size() != n) {
    throw MissingClanData("sample does not carry per-point clan data");
  }
  Scored sc = score_all_impl(spec, config);
  std::vector<double> out(n, 0.0);
  std::vector<const Point*> uni;
  for (std::size_t i = 0; i < n; ++i) {
    double r = sc.results[i].radius;
    uni.clear();
    if (std::isinf(r)) {
      for (std::size_t j = 0; j < n; ++j) {
        for (const Point& p : sample.clan_points[j]) uni.push_back(&p);
      }
    } else {
      double r2 = r * r;
      for (std::size_t j = 0; j < n; ++j) {
        if (config.window.distance2(config.points[i], config.points[j]) > r2) {
          continue;
        }
        for (const Point& p : sample.clan_points[j]) uni.push_back(&p);
      }
    }
    double best = 0.0;
    for (std::size_t a = 0; a < uni.size(); ++a) {
      for (std::size_t b = a + 1; b < uni.size(); ++b) {
        best = std::max(best, config.window.distance2(*uni[a], *uni[b]));
      }
    }
    out[i] = std::sqrt(best);
  }
  return out;
}

std::vector<ScoreResult> truncated_score_all(const ScoreSpec& spec,
                                             const GibbsSample& sample,
                                             double rho) {
  std::vector<double> diam = composed_clan_diameters(spec, sample);
  Scored sc = score_all_impl(spec, sample.config);
  for (std::size_t i = 0; i < sc.results.size(); ++i) {
    sc.results[i].truncated_out = !(diam[i] <= rho);
  }
  return sc.results;
}

double truncated_total(const ScoreSpec& spec, const GibbsSample& sample,
                       double rho) {
  std::vector<double> diam = composed_clan_diameters(spec, sample);
  Scored sc = score_all_impl(spec, sample.config);
  std::vector<char> keep(sample.config.size(), 0);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = diam[i] <= rho;
  return total_from(spec, sample.config, sample.config.window, sc, &keep);
}

}  // namespace gibbsgeom
