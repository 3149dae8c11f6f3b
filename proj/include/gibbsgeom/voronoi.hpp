#pragma once

#include "gibbsgeom/configuration.hpp"

#include <vector>

namespace gibbsgeom {

/// A convex Voronoi cell in the plane, in coordinates local to its site
/// (the site sits at the origin). Edge i runs from vertices[i] to
/// vertices[(i+1) % size]. source[i] >= 0 names the neighbor offset whose
/// bisector carved the edge; -1 marks a remnant of the initial clip box,
/// i.e. the truncation of an infinite edge.
struct VoronoiCell {
  std::vector<Point> vertices;
  std::vector<long> source;
  /// Certified: every cell vertex lies within half the search radius, so no
  /// point beyond the radius can cut the cell further.
  bool enclosed = false;
  double radius = 0.0;  // final search radius
  double half_box = 0.0;
};

/// Intersect the half-planes {p : p.v <= |v|^2 / 2} over the given neighbor
/// offsets, starting from the centered square of the given half-extent.
VoronoiCell clip_cell(const std::vector<Point>& offsets, double half_box);

/// The Voronoi cell of x against the other points, searching neighbors in a
/// doubling radius until the cell is certified enclosed or the radius
/// exceeds 8x the window diameter (then the cell is unbounded and every
/// configuration point has been considered, so the polygon is still exact).
/// Periodic windows contribute every lattice image within range, including
/// images of x itself.
VoronoiCell voronoi_cell_of(const Point& x, const PointConfiguration& others);

/// Total length of the cell's finite edges: bisector-sourced edges with
/// both endpoints off the clip box. Box-truncated edges are infinite in the
/// real tessellation and count zero.
double finite_edge_length(const VoronoiCell& cell);

}  // namespace gibbsgeom
