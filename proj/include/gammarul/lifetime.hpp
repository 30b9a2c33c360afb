#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "gammarul/errors.hpp"
#include "gammarul/samplers.hpp"
#include "gammarul/specfun.hpp"

// First-hitting-time distribution of the gamma degradation process, its
// Birnbaum-Saunders surrogate, and the Monte Carlo remaining-useful-life
// predictors built on posterior draws.

namespace gammarul {

namespace detail {
inline void check_life_args(double alpha, double beta, double threshold,
                            const char* who) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(threshold > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta) || !std::isfinite(threshold))
    throw domain_error(std::string(who) + ": alpha, beta and threshold must be positive");
}
}  // namespace detail

/// Exact lifetime CDF P(T < t) = Q(alpha t, beta C), the regularized upper
/// incomplete gamma of the degradation level at the threshold.
inline double lifetime_cdf_exact(double t, double alpha, double beta, double threshold) {
  detail::check_life_args(alpha, beta, threshold, "lifetime_cdf_exact");
  if (!(t > 0.0) || !std::isfinite(t))
    throw domain_error("lifetime_cdf_exact: t must be positive and finite");
  return reg_upper_inc_gamma(alpha * t, beta * threshold);
}

// Birnbaum-Saunders surrogate for the hitting time:
// alpha* = sqrt(1/(beta C)), beta* = beta C / alpha.
struct BSParams {
  double alpha_star = 0.0;
  double beta_star = 0.0;
};

inline BSParams bs_params(double alpha, double beta, double threshold) {
  detail::check_life_args(alpha, beta, threshold, "bs_params");
  return BSParams{std::sqrt(1.0 / (beta * threshold)), beta * threshold / alpha};
}

inline double bs_cdf(double t, const BSParams& p) {
  if (!(p.alpha_star > 0.0) || !(p.beta_star > 0.0))
    throw domain_error("bs_cdf: parameters must be positive");
  if (!(t > 0.0)) return 0.0;
  const double r = std::sqrt(t / p.beta_star);
  return std_normal_cdf((r - 1.0 / r) / p.alpha_star);
}

/// Mean time to failure under the surrogate: (1 + 2 beta C) / (2 alpha).
inline double mttf(double alpha, double beta, double threshold) {
  detail::check_life_args(alpha, beta, threshold, "mttf");
  return (1.0 + 2.0 * beta * threshold) / (2.0 * alpha);
}

/// Reliability R(t) = 1 - F(t); the surrogate CDF by default, the exact
/// incomplete-gamma CDF on request.
inline double reliability(double t, double alpha, double beta, double threshold,
                          bool exact = false) {
  if (exact) return 1.0 - lifetime_cdf_exact(t, alpha, beta, threshold);
  return 1.0 - bs_cdf(t, bs_params(alpha, beta, threshold));
}

/// Expected remaining life of a unit at degradation level y_current:
/// (1 + 2 beta_i (C - y_current)) / (2 alpha).
inline double rul_mean(double alpha, double beta_i, double threshold, double y_current) {
  detail::check_life_args(alpha, beta_i, threshold, "rul_mean");
  if (!(y_current < threshold))
    throw already_failed_error("rul_mean: unit degradation already at or past threshold");
  if (y_current < 0.0) throw domain_error("rul_mean: negative degradation level");
  return (1.0 + 2.0 * beta_i * (threshold - y_current)) / (2.0 * alpha);
}

/// rho-quantile of the remaining-life surrogate,
/// (beta*/4) [u_rho alpha* + sqrt((u_rho alpha*)^2 + 4)]^2 with the
/// residual-threshold parameters.
inline double rul_quantile(double alpha, double beta_i, double threshold, double y_current,
                           double rho) {
  detail::check_life_args(alpha, beta_i, threshold, "rul_quantile");
  if (!(y_current < threshold))
    throw already_failed_error("rul_quantile: unit degradation already at or past threshold");
  if (y_current < 0.0) throw domain_error("rul_quantile: negative degradation level");
  if (!(rho > 0.0 && rho < 1.0))
    throw domain_error("rul_quantile: rho must lie in (0, 1)");
  const BSParams p = bs_params(alpha, beta_i, threshold - y_current);
  const double u = std_normal_quantile(rho) * p.alpha_star;
  const double root = 0.5 * (u + std::sqrt(u * u + 4.0));
  return p.beta_star * root * root;
}

struct RulPrediction {
  std::string unit_id;
  std::size_t unit_index = 0;
  double epoch = std::numeric_limits<double>::quiet_NaN();  // prediction time
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;  // 1 - rho
};

/// Monte Carlo remaining-life prediction for unit i: the point value
/// averages the per-draw surrogate means, and each interval endpoint
/// averages the per-draw surrogate quantiles at rho/2 and 1 - rho/2.
inline RulPrediction mc_rul_predict(const PosteriorDraws& draws, std::size_t unit_index,
                                    double threshold, double y_current, double rho) {
  if (unit_index >= draws.n_units)
    throw shape_error("mc_rul_predict: unit index out of range");
  if (!(y_current < threshold))
    throw already_failed_error("mc_rul_predict: unit degradation already at or past "
                               "threshold");
  if (!(rho > 0.0 && rho < 1.0))
    throw domain_error("mc_rul_predict: rho must lie in (0, 1)");
  const std::size_t K = draws.size();
  if (K == 0) throw config_error("mc_rul_predict: empty draw set");

  const double residual = threshold - y_current;
  const double u_lo = std_normal_quantile(0.5 * rho);
  const double u_hi = std_normal_quantile(1.0 - 0.5 * rho);
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double a = draws.alpha[k];
    const double b = draws.beta(k, unit_index);
    point += (1.0 + 2.0 * b * residual) / (2.0 * a);
    const BSParams p = bs_params(a, b, residual);
    const double ql = 0.5 * (u_lo * p.alpha_star +
                             std::sqrt(u_lo * p.alpha_star * u_lo * p.alpha_star + 4.0));
    const double qh = 0.5 * (u_hi * p.alpha_star +
                             std::sqrt(u_hi * p.alpha_star * u_hi * p.alpha_star + 4.0));
    lower += p.beta_star * ql * ql;
    upper += p.beta_star * qh * qh;
  }
  RulPrediction out;
  out.unit_index = unit_index;
  out.point = point / static_cast<double>(K);
  out.lower = lower / static_cast<double>(K);
  out.upper = upper / static_cast<double>(K);
  out.level = 1.0 - rho;
  return out;
}

/// Diagnostic alternative to the interval above: empirical quantiles of the
/// per-draw mean remaining life. Not the headline interval; the headline
/// averages per-draw quantiles instead.
inline Estimate rul_mean_spread(const PosteriorDraws& draws, std::size_t unit_index,
                                double threshold, double y_current, double rho) {
  if (unit_index >= draws.n_units)
    throw shape_error("rul_mean_spread: unit index out of range");
  return summarize(
      draws,
      [=](double a, std::span<const double> b) {
        return rul_mean(a, b[unit_index], threshold, y_current);
      },
      rho);
}

inline auto functional_reliability(double t, double threshold, bool exact = false,
                                   std::size_t unit_index = 0) {
  return [=](double a, std::span<const double> b) {
    return reliability(t, a, b[unit_index], threshold, exact);
  };
}

inline auto functional_mttf(double threshold, std::size_t unit_index = 0) {
  return [=](double a, std::span<const double> b) {
    return mttf(a, b[unit_index], threshold);
  };
}

}  // namespace gammarul
