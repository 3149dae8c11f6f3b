#include "gibbsgeom/configuration.hpp"
#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gibbsgeom {

std::size_t CellCoordHash::operator()(const CellCoord& k) const {
  std::uint64_t h = 0x8e51176ad1c7a2b9ULL;
  for (std::int64_t v : k.c) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

NeighborIndex::NeighborIndex(const PointConfiguration& config, double cell_hint)
    : config_(config) {
  const int d = config.window.dim();
  if (d < 1) throw InvalidParams("neighbor index needs a window");
  const double vol = config.window.volume();
  const std::size_t n = std::max<std::size_t>(config.size(), 1);
  double side = cell_hint > 0.0
                    ? cell_hint
                    : std::pow(vol / static_cast<double>(n), 1.0 / d);
  side = std::max(side, 1e-12);
  for (int a = 0; a < d; ++a) {
    if (config.window.boundary == Boundary::kPeriodic) {
      // Cells must tile each axis exactly; at least one cell, side >= hint.
      n_cells_[a] = std::max<long>(
          1, static_cast<long>(std::floor(config.window.side[a] / side)));
      cell_[a] = config.window.side[a] / static_cast<double>(n_cells_[a]);
    } else {
      n_cells_[a] = 0;
      cell_[a] = side;
    }
  }
  for (std::size_t i = 0; i < config.size(); ++i) {
    CellCoord k;
    cell_of(config.points[i], k.c.data());
    buckets_[k].push_back(static_cast<std::uint32_t>(i));
  }
}

void NeighborIndex::cell_of(const Point& p, long* out) const {
  const int d = config_.window.dim();
  for (int a = 0; a < d; ++a) {
    if (config_.window.boundary == Boundary::kPeriodic) {
      const double L = config_.window.side[a];
      double rel = p[a] - config_.window.lo(a);
      rel -= L * std::floor(rel / L);  // wrap into [0, L)
      long c = static_cast<long>(std::floor(rel / cell_[a]));
      if (c >= n_cells_[a]) c = n_cells_[a] - 1;
      if (c < 0) c = 0;
      out[a] = c;
    } else {
      out[a] =
          static_cast<long>(std::floor((p[a] - config_.window.center[a]) / cell_[a]));
    }
  }
}

std::vector<std::uint32_t> NeighborIndex::neighbors_within(const Point& x, double r,
                                                           long exclude) const {
  std::vector<std::uint32_t> out;
  if (r < 0.0) return out;
  const int d = config_.window.dim();
  const double r2 = r * r;

  // Per-axis list of cell indices covering [x_a - r, x_a + r].
  std::vector<long> axis_cells[kMaxDim];
  long base[kMaxDim];
  cell_of(x, base);
  for (int a = 0; a < d; ++a) {
    const long span = static_cast<long>(std::floor(r / cell_[a])) + 1;
    if (config_.window.boundary == Boundary::kPeriodic) {
      const long n = n_cells_[a];
      if (2 * span + 1 >= n) {
        for (long c = 0; c < n; ++c) axis_cells[a].push_back(c);
      } else {
        for (long off = -span; off <= span; ++off) {
          long c = (base[a] + off) % n;
          if (c < 0) c += n;
          axis_cells[a].push_back(c);
        }
      }
    } else {
      for (long off = -span; off <= span; ++off)
        axis_cells[a].push_back(base[a] + off);
    }
  }

  // Odometer over the block.
  std::size_t idx[kMaxDim] = {};
  while (true) {
    CellCoord k;
    for (int a = 0; a < d; ++a) k.c[a] = axis_cells[a][idx[a]];
    auto it = buckets_.find(k);
    if (it != buckets_.end()) {
      for (std::uint32_t id : it->second) {
        if (static_cast<long>(id) == exclude) continue;
        if (config_.window.distance2(x, config_.points[id]) <= r2)
          out.push_back(id);
      }
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++idx[a] < axis_cells[a].size()) break;
      idx[a] = 0;
    }
    if (a == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double NeighborIndex::kth_nearest(const Point& x, int k, long exclude) const {
  if (k < 1) throw InvalidParams("kth_nearest: k must be >= 1");
  const std::size_t have = config_.size() - (exclude >= 0 ? 1 : 0);
  if (have < static_cast<std::size_t>(k)) return 0.0;

  double r = cell_[0];
  while (true) {
    auto ids = neighbors_within(x, r, exclude);
    if (ids.size() >= static_cast<std::size_t>(k)) {
      std::vector<std::pair<double, std::uint32_t>> dist;
      dist.reserve(ids.size());
      for (std::uint32_t id : ids)
        dist.emplace_back(config_.window.distance(x, config_.points[id]), id);
      std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
      const double dk = dist[k - 1].first;
      // Certified once the k-th distance is inside the searched ball, or
      // when every candidate has already been collected.
      if (dk <= r || ids.size() == have) return dk;
    }
    r *= 2.0;
  }
}

std::vector<std::uint32_t> neighbors_within(const PointConfiguration& config,
                                            const Point& x, double r) {
  NeighborIndex index(config, r);
  return index.neighbors_within(x, r, find_exact(config, x));
}

double kth_nearest_distance(const PointConfiguration& config, const Point& x,
                            int k) {
  NeighborIndex index(config);
  return index.kth_nearest(x, k, find_exact(config, x));
}

long find_exact(const PointConfiguration& config, const Point& x) {
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config.points[i] == x) return static_cast<long>(i);
  return -1;
}

}  // namespace gibbsgeom
