#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gammarul/conjugate.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/specfun.hpp"

// Unnormalized alpha marginals of the conjugate posteriors, with analytic
// first and second log-derivatives, plus the Laplace (mode/curvature) fit
// that the grid and importance samplers tune themselves with.

namespace gammarul {

struct MarginalAlphaDensity {
  std::function<double(double)> log_density;  // finite on (0, inf), -inf outside
  std::function<double(double)> dlog;
  std::function<double(double)> d2log;
  double tail_rate = 0.0;  // rate nu of the gamma tail surrogate
};

// beta_i | alpha ~ Ga(shape_offset + shape_slope * alpha, rates[i]).
struct BetaConditional {
  double shape_offset = 0.0;
  double shape_slope = 0.0;
  std::vector<double> rates;

  std::size_t units() const { return rates.size(); }
};

namespace detail {

// (1/m) sum_j ln Gamma(alpha t_j) and its alpha-derivatives, collapsed to a
// single term on equally spaced grids.
struct LagGammaSum {
  std::vector<double> lags;
  bool equal;
  double l = 0.0;
  double mean_lag = 0.0;

  explicit LagGammaSum(const MeasurementGrid& grid)
      : lags(grid.lags()), equal(grid.equal_spacing()), mean_lag(grid.mean_lag()) {
    if (equal) l = grid.spacing();
  }

  double value(double alpha) const {
    if (equal) return std::lgamma(alpha * l);
    double acc = 0.0;
    for (double t : lags) acc += std::lgamma(alpha * t);
    return acc / static_cast<double>(lags.size());
  }
  // (1/m) sum_j t_j psi(alpha t_j)
  double deriv(double alpha) const {
    if (equal) return l * digamma(alpha * l);
    double acc = 0.0;
    for (double t : lags) acc += t * digamma(alpha * t);
    return acc / static_cast<double>(lags.size());
  }
  // (1/m) sum_j t_j^2 psi'(alpha t_j)
  double deriv2(double alpha) const {
    if (equal) return l * l * trigamma(alpha * l);
    double acc = 0.0;
    for (double t : lags) acc += t * t * trigamma(alpha * t);
    return acc / static_cast<double>(lags.size());
  }
};

}  // namespace detail

/// Unnormalized posterior marginal of alpha for the homogeneous model:
///   h_p(a) = (omega_p/(delta_p lambda_p))^(delta_p Tbar_m a)
///            * Gamma(1 + delta_p Tbar_m a)
///            / [prod_j Gamma(a t_j)^(1/m)]^(delta_p)
inline MarginalAlphaDensity make_alpha_marginal(const AggParams& post) {
  post.require_proper("make_alpha_marginal");
  const double d = post.delta();
  const double tbar = post.grid().mean_lag();
  const double c0 = post.log_omega() - std::log(d * post.lambda());  // ln(omega/(d lambda))
  const detail::LagGammaSum lg(post.grid());
  const double dt = d * tbar;

  MarginalAlphaDensity out;
  out.log_density = [=](double a) {
    if (!(a > 0.0)) return -std::numeric_limits<double>::infinity();
    return dt * a * c0 + std::lgamma(1.0 + dt * a) - d * lg.value(a);
  };
  out.dlog = [=](double a) {
    return dt * (c0 + digamma(1.0 + dt * a)) - d * lg.deriv(a);
  };
  out.d2log = [=](double a) {
    return dt * dt * trigamma(1.0 + dt * a) - d * lg.deriv2(a);
  };
  out.tail_rate = tail_rate_agg(post);
  return out;
}

/// Unnormalized posterior marginal of alpha for the heterogeneous model:
///   g_p(a) = Gamma(1 + delta1 l a / n)^n / Gamma(l a)^(delta1)
///            * exp(-a delta1 l [ln delta2 + (1/n) sum ln lambda_i - ln omega])
inline MarginalAlphaDensity make_alpha_marginal(const AgmgParams& post) {
  const double tail = tail_rate_agmg(post);
  if (!(tail > 0.0))
    throw properness_error("make_alpha_marginal: improper heterogeneous posterior "
                           "(tail rate is not positive)");
  const double d1 = post.delta1();
  const double n = static_cast<double>(post.units());
  const double l = post.spacing();
  double mean_log_lambda = 0.0;
  for (double lam : post.lambdas()) mean_log_lambda += std::log(lam);
  mean_log_lambda /= n;
  const double c0 = std::log(post.delta2()) + mean_log_lambda - post.log_omega();
  const double s = d1 * l / n;  // slope of the per-unit conditional shape

  MarginalAlphaDensity out;
  out.log_density = [=](double a) {
    if (!(a > 0.0)) return -std::numeric_limits<double>::infinity();
    return n * std::lgamma(1.0 + s * a) - d1 * std::lgamma(l * a) - a * d1 * l * c0;
  };
  out.dlog = [=](double a) {
    return d1 * l * (digamma(1.0 + s * a) - digamma(l * a) - c0);
  };
  out.d2log = [=](double a) {
    return n * s * s * trigamma(1.0 + s * a) - d1 * l * l * trigamma(l * a);
  };
  out.tail_rate = tail;
  return out;
}

// The unit shape offset keeps the factorization exact: integrating
// Ga(delta Tbar a + 1, delta lambda) over beta is what produces the
// Gamma(1 + delta Tbar a) factor in the alpha marginal above.
inline BetaConditional make_beta_conditional(const AggParams& post) {
  post.require_proper("make_beta_conditional");
  return BetaConditional{1.0, post.delta() * post.grid().mean_lag(),
                         {post.delta() * post.lambda()}};
}

inline BetaConditional make_beta_conditional(const AgmgParams& post) {
  BetaConditional cond;
  cond.shape_offset = 1.0;
  cond.shape_slope = post.delta1() * post.spacing() / static_cast<double>(post.units());
  cond.rates.reserve(post.units());
  for (double lam : post.lambdas()) cond.rates.push_back(post.delta2() * lam);
  return cond;
}

struct LaplaceFit {
  double mode = 0.0;       // argmax of the log density
  double curvature = 0.0;  // -d2log at the mode
  double sigma = 0.0;      // curvature^(-1/2)
};

/// Mode and curvature of the unnormalized log marginal. Newton iteration on
/// the score with a sign-bracket safeguard; converged when
/// |dlog| <= 1e-8 * max(1, mode).
inline LaplaceFit laplace_fit(const MarginalAlphaDensity& target) {
  constexpr double kLo = 1e-12;
  constexpr double kHi = 1e12;

  // Bracket the score's sign change.
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = lo;
  double x = 1.0;
  if (target.dlog(x) > 0.0) {
    lo = x;
    for (double cand = x * 4.0; cand <= kHi; cand *= 4.0) {
      if (target.dlog(cand) <= 0.0) {
        hi = cand;
        break;
      }
      lo = cand;
    }
  } else {
    hi = x;
    for (double cand = x / 4.0; cand >= kLo; cand /= 4.0) {
      if (target.dlog(cand) > 0.0) {
        lo = cand;
        break;
      }
      hi = cand;
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw optimization_error("laplace_fit: no interior mode found in (1e-12, 1e12)");

  x = std::sqrt(lo * hi);
  double g = 0.0;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    g = target.dlog(x);
    if (std::fabs(g) <= 1e-8 * std::max(1.0, std::fabs(x))) {
      converged = true;
      break;
    }
    if (g > 0.0)
      lo = x;
    else
      hi = x;
    const double h = target.d2log(x);
    double next = (h < 0.0) ? x - g / h : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (next == x) {
      converged = true;  // bracket exhausted at machine resolution
      break;
    }
    x = next;
  }
  if (!converged && !(hi - lo <= 1e-12 * std::max(1.0, x)))
    throw optimization_error("laplace_fit: mode search did not converge");

  const double curv = -target.d2log(x);
  if (!(curv > 0.0) || !std::isfinite(curv))
    throw optimization_error("laplace_fit: nonpositive curvature at the mode");
  return LaplaceFit{x, curv, 1.0 / std::sqrt(curv)};
}

}  // namespace gammarul
