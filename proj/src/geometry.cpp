#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/geometry.hpp"

#include <cmath>

namespace gibbsgeom {

Point::Point(int dim) : dim_(dim) {
  if (dim < 0 || dim > kMaxDim) throw InvalidParams("point dimension out of range");
}

Point::Point(std::initializer_list<double> coords) {
  if (static_cast<int>(coords.size()) > kMaxDim)
    throw InvalidParams("point dimension out of range");
  dim_ = static_cast<int>(coords.size());
  int i = 0;
  for (double v : coords) c_[i++] = v;
}

Point Point::operator+(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] + o.c_[i];
  return r;
}

Point Point::operator-(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] - o.c_[i];
  return r;
}

Point Point::operator*(double s) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] * s;
  return r;
}

bool Point::operator==(const Point& o) const {
  if (dim_ != o.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (c_[i] != o.c_[i]) return false;
  return true;
}

bool Point::lex_less(const Point& o) const {
  for (int i = 0; i < dim_ && i < o.dim_; ++i) {
    if (c_[i] < o.c_[i]) return true;
    if (c_[i] > o.c_[i]) return false;
  }
  return dim_ < o.dim_;
}

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Point& a) { return dot(a, a); }

double norm(const Point& a) { return std::sqrt(norm2(a)); }

double Window::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side[i];
  return v;
}

bool Window::contains(const Point& p) const {
  for (int i = 0; i < dim(); ++i)
    if (p[i] < lo(i) || p[i] > hi(i)) return false;
  return true;
}

double Window::max_side() const {
  double m = 0.0;
  for (int i = 0; i < dim(); ++i) m = std::max(m, side[i]);
  return m;
}

double Window::diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += side[i] * side[i];
  return std::sqrt(s);
}

Window Window::cube(double volume, int dim, Boundary b) {
  return cube_at(Point::zero(dim), volume, b);
}

Window Window::cube_at(const Point& center, double volume, Boundary b) {
  if (volume <= 0.0 || center.dim() < 1) throw InvalidParams("bad cube window");
  Window w;
  w.center = center;
  w.side = Point(center.dim());
  const double s = std::pow(volume, 1.0 / center.dim());
  for (int i = 0; i < center.dim(); ++i) w.side[i] = s;
  w.boundary = b;
  return w;
}

Window Window::box(const Point& lo, const Point& hi, Boundary b) {
  if (lo.dim() != hi.dim() || lo.dim() < 1) throw InvalidParams("bad box window");
  Window w;
  w.center = (lo + hi) * 0.5;
  w.side = hi - lo;
  for (int i = 0; i < lo.dim(); ++i)
    if (w.side[i] <= 0.0) throw InvalidParams("bad box window");
  w.boundary = b;
  return w;
}

Point Window::displacement(const Point& a, const Point& b) const {
  Point d = b - a;
  if (boundary == Boundary::kPeriodic) {
    for (int i = 0; i < dim(); ++i) {
      const double L = side[i];
      d[i] -= L * std::round(d[i] / L);
    }
  }
  return d;
}

double Window::distance2(const Point& a, const Point& b) const {
  return norm2(displacement(a, b));
}

double Window::distance(const Point& a, const Point& b) const {
  return std::sqrt(distance2(a, b));
}

double ball_volume(int dim, double radius) {
  if (dim < 1) throw InvalidParams("ball dimension must be >= 1");
  if (radius < 0.0) throw InvalidParams("ball radius must be >= 0");
  const double v = std::pow(M_PI, 0.5 * dim) / std::tgamma(1.0 + 0.5 * dim);
  return v * std::pow(radius, dim);
}

double gamma_cube(double lambda, const Point& y, int dim) {
  if (lambda <= 0.0 || dim < 1 || y.dim() != dim)
    throw InvalidParams("gamma_cube: bad arguments");
  const double edge = std::pow(lambda, 1.0 / dim);
  double prod = 1.0;
  for (int i = 0; i < dim; ++i) prod *= std::max(edge - std::fabs(y[i]), 0.0);
  return lambda - prod;
}

}  // namespace gibbsgeom
