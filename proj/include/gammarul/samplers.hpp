#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gammarul/ars.hpp"
#include "gammarul/conjugate.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/marginal.hpp"
#include "gammarul/rng.hpp"
#include "gammarul/specfun.hpp"

// The three posterior samplers: Gibbs with adaptive rejection sampling for
// the alpha conditional, discrete grid sampling (DGS) on a six-sigma Laplace
// interval, and sampling importance resampling (SIR) with a moment-matched
// gamma instrumental distribution.

namespace gammarul {

struct SamplerConfig {
  std::size_t draws = 1000;      // K, retained posterior sample size
  std::size_t pool = 10000;      // M, grid size (DGS) / importance pool (SIR)
  std::size_t burn_in = 1000;    // B, Gibbs only
  std::size_t thin = 2;          // L, Gibbs only
  double credible_level = 0.95;  // 1 - rho

  void validate() const {
    if (draws < 1) throw config_error("sampler config: draws must be >= 1");
    if (pool < 100) throw config_error("sampler config: pool must be >= 100");
    if (thin < 1) throw config_error("sampler config: thin must be >= 1");
    if (!(credible_level > 0.0 && credible_level < 1.0))
      throw config_error("sampler config: credible level must lie in (0, 1)");
  }
};

struct SamplerDiagnostics {
  double effective_sample_size = std::numeric_limits<double>::quiet_NaN();  // SIR
  double pool_weighted_mean = std::numeric_limits<double>::quiet_NaN();     // SIR
  double instrumental_shape = std::numeric_limits<double>::quiet_NaN();     // SIR
  double instrumental_rate = std::numeric_limits<double>::quiet_NaN();      // SIR
  double tail_mass_bound = std::numeric_limits<double>::quiet_NaN();        // DGS
  std::size_t support_points = 0;                                           // DGS
  bool resolution_warning = false;                                          // DGS
  bool degeneracy_warning = false;                                          // SIR
  std::size_t density_evaluations = 0;
  std::size_t ars_rejections = 0;  // Gibbs
  double laplace_mode = std::numeric_limits<double>::quiet_NaN();
  double laplace_sigma = std::numeric_limits<double>::quiet_NaN();
};

struct PosteriorDraws {
  std::vector<double> alpha;  // K
  std::vector<double> betas;  // K x n, row-major
  std::size_t n_units = 1;
  std::string sampler_tag;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SamplerDiagnostics diagnostics;

  std::size_t size() const { return alpha.size(); }
  double beta(std::size_t k, std::size_t i = 0) const { return betas[k * n_units + i]; }
  std::span<const double> beta_row(std::size_t k) const {
    return std::span<const double>(betas).subspan(k * n_units, n_units);
  }
};

namespace detail {

// Cumulative-sum inversion with one uniform per draw; ties broken toward the
// lower index so replay under a fixed stream is stable.
inline std::size_t pick_index(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

inline void append_beta_draws(const BetaConditional& cond, double alpha,
                              std::vector<double>& betas, RngStream& rng) {
  const double shape = cond.shape_offset + cond.shape_slope * alpha;
  for (double rate : cond.rates) betas.push_back(sample_gamma(shape, rate, rng));
}

// Type-7 quantile on an already sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Discrete grid sampling: approximate the alpha marginal on M equally
/// spaced points over the six-sigma Laplace interval, draw alpha from the
/// resulting discrete distribution, then draw each beta from its gamma
/// conditional. Grid probabilities are formed in log space with
/// max-subtraction; raw density values would overflow at realistic delta_p.
inline PosteriorDraws dgs_sample(const MarginalAlphaDensity& target,
                                 const BetaConditional& cond, const SamplerConfig& cfg,
                                 RngStream& rng) {
  cfg.validate();
  const LaplaceFit lf = laplace_fit(target);
  const std::size_t M = cfg.pool;

  double a1 = std::max(0.0, lf.mode - 6.0 * lf.sigma);
  const double a2 = lf.mode + 6.0 * lf.sigma;
  double step = (a2 - a1) / static_cast<double>(M - 1);
  if (a1 <= 0.0) {
    // keep the first grid point strictly positive; the density vanishes at 0
    a1 = 0.5 * step;
    step = (a2 - a1) / static_cast<double>(M - 1);
  }

  std::vector<double> grid(M);
  std::vector<double> logw(M);
  double logw_max = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < M; ++s) {
    grid[s] = a1 + step * static_cast<double>(s);
    logw[s] = target.log_density(grid[s]);
    logw_max = std::max(logw_max, logw[s]);
  }
  std::vector<double> weight(M);
  std::vector<double> cumulative(M);
  double total = 0.0;
  for (std::size_t s = 0; s < M; ++s) {
    weight[s] = std::exp(logw[s] - logw_max);
    total += weight[s];
    cumulative[s] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw numeric_error("dgs_sample: grid mass is degenerate");

  PosteriorDraws out;
  out.sampler_tag = "dgs";
  out.n_units = cond.units();
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.diagnostics.laplace_mode = lf.mode;
  out.diagnostics.laplace_sigma = lf.sigma;
  out.diagnostics.density_evaluations = M;

  // How many grid points carry 99.9% of the mass; warn when the discrete
  // support is too coarse to resemble a continuous marginal.
  {
    std::vector<double> sorted = weight;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0;
    std::size_t count = 0;
    for (double wv : sorted) {
      acc += wv;
      ++count;
      if (acc >= 0.999 * total) break;
    }
    out.diagnostics.support_points = count;
    out.diagnostics.resolution_warning = count < 10;
  }

  // Bound on the marginal mass outside [A1, A2]: for a log-concave density
  // decreasing at A2 with log-slope s < 0, the right tail integral is at
  // most h(A2)/|s|; same on the left. Compare with the grid integral.
  {
    const double slope_hi = target.dlog(a2);
    const double slope_lo = target.dlog(a1);
    double outside = 0.0;
    bool bounded = true;
    if (slope_hi < 0.0)
      outside += std::exp(logw[M - 1] - logw_max) / (-slope_hi);
    else
      bounded = false;
    if (a1 > step) {  // left edge not clamped against zero
      if (slope_lo > 0.0)
        outside += std::exp(logw[0] - logw_max) / slope_lo;
      else
        bounded = false;
    }
    out.diagnostics.tail_mass_bound =
        bounded ? outside / (total * step) : std::numeric_limits<double>::infinity();
  }

  out.alpha.reserve(cfg.draws);
  out.betas.reserve(cfg.draws * cond.units());
  for (std::size_t k = 0; k < cfg.draws; ++k) {
    const double u = rng.uniform() * total;
    const double a = grid[detail::pick_index(cumulative, u)];
    out.alpha.push_back(a);
    detail::append_beta_draws(cond, a, out.betas, rng);
  }
  return out;
}

/// Sampling importance resampling: pool draws from a gamma instrumental
/// distribution whose rate starts at the marginal's tail rate and is then
/// precision-matched to the Laplace curvature, importance weights in log
/// space, multinomial resampling of K values.
inline PosteriorDraws sir_sample(const MarginalAlphaDensity& target,
                                 const BetaConditional& cond, const SamplerConfig& cfg,
                                 RngStream& rng) {
  cfg.validate();
  if (!(target.tail_rate > 0.0))
    throw properness_error("sir_sample: tail rate must be positive");
  const LaplaceFit lf = laplace_fit(target);

  const double b0 = target.tail_rate;
  const double a0 = lf.mode * b0;
  const double ratio = (b0 * b0 / a0) / lf.curvature;  // precision ratio
  const double a = a0 / ratio;
  const double b = b0 / ratio;

  const std::size_t M = cfg.pool;
  std::vector<double> pool(M);
  std::vector<double> logw(M);
  double logw_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < M; ++i) {
    pool[i] = sample_gamma(a, b, rng);
    logw[i] = target.log_density(pool[i]) - gamma_log_pdf(pool[i], a, b);
    logw_max = std::max(logw_max, logw[i]);
  }
  std::vector<double> cumulative(M);
  double total = 0.0;
  double sumsq = 0.0;
  double weighted_mean = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double w = std::exp(logw[i] - logw_max);
    total += w;
    cumulative[i] = total;
    sumsq += w * w;
    weighted_mean += w * pool[i];
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw numeric_error("sir_sample: importance weights are degenerate");
  weighted_mean /= total;
  const double ess = total * total / sumsq;

  PosteriorDraws out;
  out.sampler_tag = "sir";
  out.n_units = cond.units();
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.diagnostics.effective_sample_size = ess;
  out.diagnostics.pool_weighted_mean = weighted_mean;
  out.diagnostics.instrumental_shape = a;
  out.diagnostics.instrumental_rate = b;
  out.diagnostics.degeneracy_warning = ess < 0.01 * static_cast<double>(M);
  out.diagnostics.density_evaluations = M;
  out.diagnostics.laplace_mode = lf.mode;
  out.diagnostics.laplace_sigma = lf.sigma;

  out.alpha.reserve(cfg.draws);
  out.betas.reserve(cfg.draws * cond.units());
  for (std::size_t k = 0; k < cfg.draws; ++k) {
    const double u = rng.uniform() * total;
    const double av = pool[detail::pick_index(cumulative, u)];
    out.alpha.push_back(av);
    detail::append_beta_draws(cond, av, out.betas, rng);
  }
  return out;
}

namespace detail {

// Mode of the alpha conditional: solves (1/m) sum_j t_j psi(alpha t_j) = c1
// by safeguarded Newton; used to seed the adaptive rejection sampler.
inline double conditional_mode(const LagGammaSum& lg, double c1, double start) {
  double x = start > 0.0 ? start : 1.0;
  for (int it = 0; it < 100; ++it) {
    const double g = lg.deriv(x) - c1;
    const double h = lg.deriv2(x);
    double next = x - g / h;
    if (!std::isfinite(next) || next <= 0.0) next = 0.5 * x;
    if (std::fabs(next - x) <= 1e-10 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace detail

/// Gibbs sampling for the homogeneous posterior: alternates the gamma
/// conditional of beta with an ARS draw from the log-concave alpha
/// conditional. Runs burn_in + draws * thin iterations and keeps every
/// thin-th draw after burn-in.
inline PosteriorDraws gibbs_sample(const AggParams& post, const SamplerConfig& cfg,
                                   RngStream& rng,
                                   std::optional<double> init_alpha = std::nullopt) {
  cfg.validate();
  post.require_proper("gibbs_sample");
  const double dp = post.delta();
  const double tbar = post.grid().mean_lag();
  const double lambda_p = post.lambda();
  const double log_omega_p = post.log_omega();
  const detail::LagGammaSum lg(post.grid());

  double alpha = init_alpha.value_or(laplace_fit(make_alpha_marginal(post)).mode);
  if (!(alpha > 0.0)) throw config_error("gibbs_sample: initial alpha must be positive");

  PosteriorDraws out;
  out.sampler_tag = "gs";
  out.n_units = 1;
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.alpha.reserve(cfg.draws);
  out.betas.reserve(cfg.draws);

  const std::size_t total_iter = cfg.burn_in + cfg.draws * cfg.thin;
  std::size_t evals = 0;
  std::size_t rejections = 0;
  for (std::size_t it = 1; it <= total_iter; ++it) {
    // same unit shape offset as the grid/importance conditionals, so the
    // chain's stationary joint is exactly the conjugate posterior
    const double beta = sample_gamma(dp * tbar * alpha + 1.0, dp * lambda_p, rng);

    // pi(alpha | beta, y) on the log scale: c1*dp*a - dp*(1/m) sum ln G(a t_j)
    const double c1 = tbar * (std::log(beta) + log_omega_p);
    const auto logf = [&](double av) { return dp * (c1 * av - lg.value(av)); };
    const auto dlogf = [&](double av) { return dp * (c1 - lg.deriv(av)); };
    const double center = detail::conditional_mode(lg, c1, alpha);
    AdaptiveRejectionSampler ars(logf, dlogf, 0.0,
                                 std::numeric_limits<double>::infinity(),
                                 {0.5 * center, center, 2.0 * center});
    alpha = ars.draw(rng);
    evals += ars.evaluations();
    rejections += ars.rejections();

    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.alpha.push_back(alpha);
      out.betas.push_back(beta);
    }
  }
  out.diagnostics.density_evaluations = evals;
  out.diagnostics.ars_rejections = rejections;
  return out;
}

struct Estimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;  // 1 - rho
};

/// Posterior mean plus the equal-tailed (rho/2, 1-rho/2) empirical interval
/// of a functional of (alpha, beta_1..beta_n).
inline Estimate summarize(
    const PosteriorDraws& draws,
    const std::function<double(double, std::span<const double>)>& functional, double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw config_error("summarize: rho must lie in (0, 1)");
  const std::size_t K = draws.size();
  if (K < 20)
    throw config_error("summarize: at least 20 draws are required for interval "
                       "estimates, got " + std::to_string(K));
  std::vector<double> vals(K);
  double mean = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    vals[k] = functional(draws.alpha[k], draws.beta_row(k));
    mean += vals[k];
  }
  mean /= static_cast<double>(K);
  std::sort(vals.begin(), vals.end());
  return Estimate{mean, detail::quantile_sorted(vals, 0.5 * rho),
                  detail::quantile_sorted(vals, 1.0 - 0.5 * rho), 1.0 - rho};
}

inline auto functional_alpha() {
  return [](double a, std::span<const double>) { return a; };
}

inline auto functional_beta(std::size_t i = 0) {
  return [i](double, std::span<const double> b) { return b[i]; };
}

}  // namespace gammarul
