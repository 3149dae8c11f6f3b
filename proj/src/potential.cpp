#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/potential.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace gibbsgeom {

Potential Potential::hard_core(double r) {
  if (r <= 0.0) throw InvalidParams("hard core radius must be > 0");
  return Potential{PotentialKind::kHardCore, r, 0.0};
}

Potential Potential::strauss(double r, double a) {
  if (r <= 0.0) throw InvalidParams("pair radius must be > 0");
  if (a < 0.0) throw InvalidParams("pair weight must be >= 0");
  return Potential{PotentialKind::kStraussPair, r, a};
}

Potential Potential::area_interaction(double r) {
  if (r <= 0.0) throw InvalidParams("disc radius must be > 0");
  return Potential{PotentialKind::kAreaInteraction, r, 0.0};
}

double Potential::range() const {
  return kind == PotentialKind::kAreaInteraction ? 2.0 * r : r;
}

namespace {

constexpr int kQuasiPoints = 4096;

// Radical-inverse (Halton) table in [0,1)^d, shared by every evaluation so
// the uncovered-volume estimate is a fixed functional of the neighbor set.
const double* quasi_table(int dim) {
  static std::once_flag flag;
  static std::vector<double> table;
  std::call_once(flag, [] {
    constexpr int primes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};
    table.resize(static_cast<std::size_t>(kQuasiPoints) * kMaxDim);
    for (int i = 0; i < kQuasiPoints; ++i) {
      for (int a = 0; a < kMaxDim; ++a) {
        const int base = primes[a];
        double f = 1.0, v = 0.0;
        for (int n = i + 1; n > 0; n /= base) {
          f /= base;
          v += f * (n % base);
        }
        table[static_cast<std::size_t>(i) * kMaxDim + a] = v;
      }
    }
  });
  (void)dim;
  return table.data();
}

// Uncovered volume of the ball B_r(x) against the given neighbor discs.
double uncovered_volume(const Point& x, double r,
                        const std::vector<const Point*>& near,
                        const Window& window) {
  const int d = x.dim();
  if (near.empty()) return ball_volume(d, r);
  const double* q = quasi_table(d);
  const double r2 = r * r;
  int inside = 0;
  for (int i = 0; i < kQuasiPoints; ++i) {
    Point p(d);
    for (int a = 0; a < d; ++a)
      p[a] = x[a] + (2.0 * q[static_cast<std::size_t>(i) * kMaxDim + a] - 1.0) * r;
    if (norm2(p - x) > r2) continue;
    bool covered = false;
    for (const Point* y : near) {
      if (window.distance2(p, *y) <= r2) {
        covered = true;
        break;
      }
    }
    if (!covered) ++inside;
  }
  const double cube = std::pow(2.0 * r, d);
  return cube * static_cast<double>(inside) / kQuasiPoints;
}

template <typename NeighborRange>
double energy_impl(const Potential& pot, const Point& x, NeighborRange&& points,
                   const Window& window) {
  switch (pot.kind) {
    case PotentialKind::kHardCore: {
      const double r2 = pot.r * pot.r;
      for (const Point& y : points)
        if (window.distance2(x, y) <= r2)
          return std::numeric_limits<double>::infinity();
      return 0.0;
    }
    case PotentialKind::kStraussPair: {
      const double r2 = pot.r * pot.r;
      long count = 0;
      for (const Point& y : points)
        if (window.distance2(x, y) <= r2) ++count;
      return pot.a * static_cast<double>(count);
    }
    case PotentialKind::kAreaInteraction: {
      const double reach2 = 4.0 * pot.r * pot.r;
      std::vector<const Point*> near;
      for (const Point& y : points)
        if (window.distance2(x, y) <= reach2) near.push_back(&y);
      return uncovered_volume(x, pot.r, near, window);
    }
  }
  return 0.0;
}

}  // namespace

double local_energy(const Potential& pot, const Point& x,
                    const PointConfiguration& config) {
  return energy_impl(pot, x, config.points, config.window);
}

double local_energy(const Potential& pot, const Point& x,
                    const std::vector<Point>& neighbors, const Window& window) {
  return energy_impl(pot, x, neighbors, window);
}

double pair_insertion_energy(const Potential& pot, const Point& x,
                             const Point& y, const PointConfiguration& config) {
  const double first = local_energy(pot, x, config);
  PointConfiguration with_x = config;
  with_x.points.push_back(x);
  if (with_x.has_marks()) with_x.marks.push_back(0.0);
  return first + local_energy(pot, y, with_x);
}

double admissibility_margin(const Potential& pot, double tau, double beta,
                            int dim) {
  if (tau < 0.0) throw InvalidParams("intensity must be >= 0");
  if (beta < 0.0) throw InvalidParams("inverse temperature must be >= 0");
  // Lower energy bound is 0 for every variant, so the beta factor is 1.
  return tau * ball_volume(dim, pot.range() + 1.0);
}

}  // namespace gibbsgeom
