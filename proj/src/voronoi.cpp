#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/voronoi.hpp"

#include <algorithm>
#include <cmath>

namespace gibbsgeom {

namespace {

/// Clip a convex polygon (with per-edge provenance) against one half-plane
/// n.p <= rhs. Vertices store the source of the edge *starting* at them, so
/// the vertex emitted at an exit crossing starts the new on-bisector edge.
void clip_one(std::vector<Point>& verts, std::vector<long>& src,
              const Point& n, double rhs, long label) {
  const std::size_t m = verts.size();
  if (m == 0) return;
  std::vector<Point> out_v;
  std::vector<long> out_s;
  out_v.reserve(m + 2);
  out_s.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = verts[i];
    const Point& b = verts[(i + 1) % m];
    const double da = dot(n, a) - rhs;
    const double db = dot(n, b) - rhs;
    const bool a_in = da <= 0.0;
    const bool b_in = db <= 0.0;
    if (a_in) {
      out_v.push_back(a);
      out_s.push_back(src[i]);
    }
    if (a_in != b_in) {
      const double t = da / (da - db);
      Point p(2);
      p[0] = a[0] + t * (b[0] - a[0]);
      p[1] = a[1] + t * (b[1] - a[1]);
      out_v.push_back(p);
      // Leaving the half-plane: the edge from the crossing runs along the
      // bisector. Entering: the remainder of the original edge.
      out_s.push_back(a_in ? label : src[i]);
    }
  }
  verts = std::move(out_v);
  src = std::move(out_s);
}

}  // namespace

VoronoiCell clip_cell(const std::vector<Point>& offsets, double half_box) {
  VoronoiCell cell;
  cell.half_box = half_box;
  const double h = half_box;
  cell.vertices = {Point{-h, -h}, Point{h, -h}, Point{h, h}, Point{-h, h}};
  cell.source = {-1, -1, -1, -1};
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    clip_one(cell.vertices, cell.source, offsets[j],
             0.5 * norm2(offsets[j]), static_cast<long>(j));
    if (cell.vertices.empty()) break;  // cannot happen for a site's own cell
  }
  return cell;
}

VoronoiCell voronoi_cell_of(const Point& x, const PointConfiguration& others) {
  if (x.dim() != 2) throw InvalidParams("Voronoi cells are planar (d == 2)");
  const Window& w = others.window;
  const double diam = w.diameter();
  const double cap = 8.0 * std::max(diam, 1e-12);
  const double half_box = 2.5 * cap;

  // Start from the nearest-neighbor scale.
  double r0 = cap;
  for (const Point& y : others.points) {
    const double d = w.distance(x, y);
    if (d > 0.0) r0 = std::min(r0, 2.0 * d);
  }
  double radius = std::min(std::max(r0, 1e-9), cap);

  const bool periodic = w.boundary == Boundary::kPeriodic;
  while (true) {
    std::vector<Point> offsets;
    if (!periodic) {
      for (const Point& y : others.points) {
        Point v = y - x;
        const double d2 = norm2(v);
        if (d2 > 0.0 && d2 <= radius * radius) offsets.push_back(v);
      }
    } else {
      // All lattice images within the radius count, the site's own included.
      const long kx = static_cast<long>(std::floor(radius / w.side[0])) + 1;
      const long ky = static_cast<long>(std::floor(radius / w.side[1])) + 1;
      auto add_images = [&](const Point& base) {
        for (long i = -kx; i <= kx; ++i) {
          for (long j = -ky; j <= ky; ++j) {
            Point v(2);
            v[0] = base[0] + static_cast<double>(i) * w.side[0];
            v[1] = base[1] + static_cast<double>(j) * w.side[1];
            const double d2 = norm2(v);
            if (d2 > 0.0 && d2 <= radius * radius) offsets.push_back(v);
          }
        }
      };
      add_images(Point{0.0, 0.0});  // self-images bound the cell on a torus
      for (const Point& y : others.points) add_images(w.displacement(x, y));
    }
    // Deterministic clip order regardless of how the points were stored.
    std::sort(offsets.begin(), offsets.end(),
              [](const Point& a, const Point& b) { return a.lex_less(b); });

    VoronoiCell cell = clip_cell(offsets, half_box);
    double vmax = 0.0;
    for (const Point& v : cell.vertices) vmax = std::max(vmax, norm(v));
    if (2.0 * vmax <= radius) {
      cell.enclosed = true;
      cell.radius = radius;
      return cell;
    }
    if (radius >= cap) {
      cell.enclosed = false;
      cell.radius = radius;
      return cell;
    }
    radius = std::min(2.0 * radius, cap);
  }
}

double finite_edge_length(const VoronoiCell& cell) {
  const std::size_t m = cell.vertices.size();
  if (m < 2) return 0.0;
  const double on_box = cell.half_box * (1.0 - 1e-9);
  auto touches_box = [&](const Point& v) {
    return std::max(std::fabs(v[0]), std::fabs(v[1])) >= on_box;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (cell.source[i] < 0) continue;
    const Point& a = cell.vertices[i];
    const Point& b = cell.vertices[(i + 1) % m];
    if (touches_box(a) || touches_box(b)) continue;
    total += norm(b - a);
  }
  return total;
}

}  // namespace gibbsgeom
