#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gibbsgeom {

/// Maximum spatial dimension supported by the inline point storage. High
/// enough for every planned use (space-time products included) while keeping
/// points trivially copyable.
inline constexpr int kMaxDim = 8;

/// A point in R^d, d <= kMaxDim. Value type, no heap traffic.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<double> coords);

  static Point zero(int dim) { return Point(dim); }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator*(double s) const;

  bool operator==(const Point& o) const;

  /// Lexicographic comparison; the tiebreaker for equal distances and
  /// simultaneous births.
  bool lex_less(const Point& o) const;

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

double dot(const Point& a, const Point& b);
double norm2(const Point& a);
double norm(const Point& a);

enum class Boundary { kFree, kPeriodic };

/// Axis-aligned box with a boundary convention. Periodic mode measures
/// distances through the torus obtained by gluing opposite faces.
struct Window {
  Point center;
  Point side;  // per-axis side lengths, all > 0
  Boundary boundary = Boundary::kFree;

  int dim() const { return center.dim(); }
  double volume() const;
  double lo(int axis) const { return center[axis] - 0.5 * side[axis]; }
  double hi(int axis) const { return center[axis] + 0.5 * side[axis]; }
  bool contains(const Point& p) const;
  double max_side() const;
  double diameter() const;  // free diameter of the box

  /// Cube of the given volume centered at the origin.
  static Window cube(double volume, int dim, Boundary b = Boundary::kFree);

  /// Cube of the given volume centered at `center`.
  static Window cube_at(const Point& center, double volume,
                        Boundary b = Boundary::kFree);

  /// Box spanning [lo_i, hi_i] per axis.
  static Window box(const Point& lo, const Point& hi,
                    Boundary b = Boundary::kFree);

  /// Shortest displacement from a to b under this window's boundary rule.
  /// Free mode: b - a. Periodic mode: per-axis wrapped difference.
  Point displacement(const Point& a, const Point& b) const;

  double distance(const Point& a, const Point& b) const;
  double distance2(const Point& a, const Point& b) const;
};

/// Volume of the d-dimensional Euclidean ball of radius r:
/// pi^{d/2} / Gamma(1 + d/2) * r^d.
double ball_volume(int dim, double radius);

/// Volume of the part of the centered cube of volume `lambda` not covered
/// by its own translate by y: lambda - prod_i max(lambda^{1/d} - |y_i|, 0).
double gamma_cube(double lambda, const Point& y, int dim);

}  // namespace gibbsgeom
