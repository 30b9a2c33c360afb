#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "gammarul/errors.hpp"

// Special functions backing the conjugate updates, the marginal densities
// and the lifetime formulas. Everything here is pure and thread-safe.
//
// Gamma distributions are rate-parameterized throughout the project:
// Ga(a, b) has density proportional to b^a y^(a-1) exp(-b y).

namespace gammarul {

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw domain_error("log_gamma: argument must be positive and finite");
  return std::lgamma(x);
}

/// First derivative of ln Gamma. Relative error below 1e-12 on (0, inf).
inline double digamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw domain_error("digamma: argument must be positive and finite");
  double acc = 0.0;
  // Shift above 10 where the Bernoulli expansion converges fast.
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double u = inv * inv;
  const double tail =
      u * (1.0 / 12.0 +
           u * (-1.0 / 120.0 +
                u * (1.0 / 252.0 +
                     u * (-1.0 / 240.0 +
                          u * (1.0 / 132.0 +
                               u * (-691.0 / 32760.0 + u * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 * inv - tail;
}

/// Second derivative of ln Gamma.
inline double trigamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw domain_error("trigamma: argument must be positive and finite");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double u = inv * inv;
  const double tail =
      inv * u *
      (1.0 / 6.0 +
       u * (-1.0 / 30.0 +
            u * (1.0 / 42.0 +
                 u * (-1.0 / 30.0 + u * (5.0 / 66.0 + u * (-691.0 / 2730.0))))));
  return acc + inv + 0.5 * u + tail;
}

namespace detail {

// Series expansion of the regularized lower incomplete gamma P(a, x);
// good for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw numeric_error("incomplete gamma series failed to converge");
}

// Modified Lentz continued fraction for Q(a, x); good for x >= a + 1.
inline double gamma_q_contfrac(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw numeric_error("incomplete gamma continued fraction failed to converge");
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(shape, x), monotone decreasing in x.
inline double reg_upper_inc_gamma(double shape, double x) {
  if (!std::isfinite(shape) || shape <= 0.0 || !std::isfinite(x) || x < 0.0)
    throw domain_error("reg_upper_inc_gamma: requires shape > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < shape + 1.0) return 1.0 - detail::gamma_p_series(shape, x);
  return detail::gamma_q_contfrac(shape, x);
}

/// Regularized lower incomplete gamma P(shape, x) = 1 - Q(shape, x).
inline double reg_lower_inc_gamma(double shape, double x) {
  if (!std::isfinite(shape) || shape <= 0.0 || !std::isfinite(x) || x < 0.0)
    throw domain_error("reg_lower_inc_gamma: requires shape > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < shape + 1.0) return detail::gamma_p_series(shape, x);
  return 1.0 - detail::gamma_q_contfrac(shape, x);
}

/// Standard normal CDF.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

/// Standard normal quantile, inverse of std_normal_cdf to ~1e-15.
inline double std_normal_quantile(double p) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0)
    throw domain_error("std_normal_quantile: p must lie in (0, 1)");

  // Rational initial guess (Acklam), then one Halley polish step.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  if (0.5 * x * x < 700.0) {
    const double err = std_normal_cdf(x) - p;
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// log of the Ga(shape, rate) density at x > 0.
inline double gamma_log_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw domain_error("gamma_log_pdf: shape and rate must be positive");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         std::lgamma(shape);
}

}  // namespace gammarul
