#pragma once

#include <cstddef>
#include <vector>

namespace gibbsgeom {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile (inverse CDF), u in (0, 1). Rational initial
/// guess refined by one Halley step; good to ~1e-13 across the range.
double norm_quantile(double u);

/// Upper tail of the chi-square distribution with k degrees of freedom,
/// i.e. P[X >= x]. Regularized incomplete gamma, series/continued fraction.
double chi2_sf(double x, double k);

double mean_of(const std::vector<double>& xs);

/// Unbiased sample variance (n - 1 in the denominator); 0 for n < 2.
double variance_of(const std::vector<double>& xs);

/// Delete-one jackknife standard error of the unbiased sample variance.
double jackknife_variance_se(const std::vector<double>& xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n_points = 0;
};

/// Ordinary least squares of y on x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// sqrt(p(1-p)/n), the binomial standard error of a proportion.
double binomial_se(double p, std::size_t n);

}  // namespace gibbsgeom
