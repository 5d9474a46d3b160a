// Small statistics helpers used by the aggregation layer: Student-t
// quantiles for confidence intervals and least-squares slopes.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace regastro {

namespace detail {

// Regularized incomplete beta via Lentz's continued fraction.
inline double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_beta =
      std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log(1.0 - x) - ln_beta);
  const bool swap = x > (a + 1.0) / (a + b + 2.0);
  if (swap) return 1.0 - ibeta(b, a, 1.0 - x);

  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const int m = i / 2;
    double numerator;
    if (i == 0)
      numerator = 1.0;
    else if (i % 2 == 0)
      numerator = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    else
      numerator = -((a + m) * (a + b + m) * x) /
                  ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    d = 1.0 + numerator * d;
    if (std::fabs(d) < 1e-30) d = 1e-30;
    d = 1.0 / d;
    c = 1.0 + numerator / c;
    if (std::fabs(c) < 1e-30) c = 1e-30;
    f *= c * d;
    if (std::fabs(1.0 - c * d) < 1e-12) break;
  }
  return front * (f - 1.0) / a;
}

}  // namespace detail

inline double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * detail::ibeta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

// Two-sided quantile by bisection on the CDF.
inline double student_t_quantile(double p, double df) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("t quantile: p");
  double lo = -1e3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int n = 0;
};

inline SlopeFit least_squares_slope(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares_slope: need >= 2 points");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  SlopeFit fit;
  fit.n = n;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_stddev(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace regastro
