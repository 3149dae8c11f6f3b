#pragma once

#include "gibbsgeom/configuration.hpp"

namespace gibbsgeom {

enum class PotentialKind { kHardCore, kStraussPair, kAreaInteraction };

/// Finite-range interaction. Local energy is the increment the potential
/// assigns to inserting a point; it is bounded below by 0 for every variant.
struct Potential {
  PotentialKind kind = PotentialKind::kStraussPair;
  double r = 1.0;  // exclusion / pair / disc radius
  double a = 1.0;  // pair weight (Strauss only)

  static Potential hard_core(double r);
  static Potential strauss(double r, double a);
  static Potential area_interaction(double r);

  /// Interaction range r: points farther than this from x cannot change
  /// the insertion energy at x. Twice the disc radius for area interaction.
  double range() const;
};

/// Energy increment for inserting x into the configuration. +infinity when a
/// hard-core exclusion is violated. Respects the window's boundary rule.
double local_energy(const Potential& pot, const Point& x,
                    const PointConfiguration& config);

/// Same, against an explicit neighbor list (positions only). Used by the
/// sampler where configurations are transient.
double local_energy(const Potential& pot, const Point& x,
                    const std::vector<Point>& neighbors, const Window& window);

/// Energy increment for inserting the pair {x, y}: the first point against
/// the configuration, the second against the configuration plus the first.
double pair_insertion_energy(const Potential& pot, const Point& x,
                             const Point& y, const PointConfiguration& config);

/// tau * v_d * exp(-beta * m0) * (range + 1)^d with m0 = 0 for the variants
/// implemented here. The thinning construction is guaranteed to terminate
/// when this is < 1.
double admissibility_margin(const Potential& pot, double tau, double beta,
                            int dim);

}  // namespace gibbsgeom
