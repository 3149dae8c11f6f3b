#pragma once

#include "gibbsgeom/geometry.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gibbsgeom {

/// Finite point set in a window, optionally carrying one real mark per point
/// (birth times, claim marks, ...). Point identifiers are vector indices.
struct PointConfiguration {
  Window window;
  std::vector<Point> points;
  std::vector<double> marks;  // empty, or one entry per point

  std::size_t size() const { return points.size(); }
  bool has_marks() const { return !marks.empty(); }

  void add(const Point& p) { points.push_back(p); }
  void add(const Point& p, double mark) {
    points.push_back(p);
    marks.push_back(mark);
  }
};

/// Integer cell coordinates. Kept whole as the bucket key so lookups stay
/// exact for any dimension; the hash only spreads buckets.
struct CellCoord {
  std::array<std::int64_t, kMaxDim> c{};
  bool operator==(const CellCoord& o) const { return c == o.c; }
};

struct CellCoordHash {
  std::size_t operator()(const CellCoord& k) const;
};

/// Uniform grid over the window, buckets keyed by integer cell coordinates.
/// Built once per configuration; queries scan the cell block overlapping the
/// search ball. Periodic windows wrap coordinates and cell indices.
class NeighborIndex {
 public:
  /// cell_hint > 0 fixes the cell side (pass the dominant query radius);
  /// otherwise the side targets one point per cell on average.
  explicit NeighborIndex(const PointConfiguration& config, double cell_hint = 0.0);

  /// Identifiers of points within distance r of x (closed ball), excluding
  /// `exclude` if nonnegative. Sorted ascending.
  std::vector<std::uint32_t> neighbors_within(const Point& x, double r,
                                              long exclude = -1) const;

  /// Distance from x to its k-th nearest point, excluding `exclude`;
  /// 0 when fewer than k candidates exist. Ties resolved by identifier.
  double kth_nearest(const Point& x, int k, long exclude = -1) const;

  double cell_side(int axis) const { return cell_[axis]; }

 private:
  void cell_of(const Point& p, long* out) const;

  const PointConfiguration& config_;
  double cell_[kMaxDim];
  long n_cells_[kMaxDim];  // periodic only: cells per axis
  std::unordered_map<CellCoord, std::vector<std::uint32_t>, CellCoordHash> buckets_;
};

/// Convenience wrappers taking a free point x. If x coincides exactly with a
/// configuration point, one such instance is excluded (the point "itself");
/// distinct points at the same location still count as neighbors.
std::vector<std::uint32_t> neighbors_within(const PointConfiguration& config,
                                            const Point& x, double r);
double kth_nearest_distance(const PointConfiguration& config, const Point& x,
                            int k);

/// Index of one configuration point exactly equal to x, or -1.
long find_exact(const PointConfiguration& config, const Point& x);

}  // namespace gibbsgeom
