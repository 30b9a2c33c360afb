#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gammarul/data.hpp"
#include "gammarul/errors.hpp"

// Conjugate families for the gamma degradation process.
//
// Homogeneous model: increments y_ij ~ Ga(alpha t_j, beta). The conjugate
// prior for (alpha, beta) is the approximated-gamma-gamma family
// AGG(delta, omega, lambda), tied to the measurement grid:
//
//   pi(alpha, beta) ~ (beta omega)^(delta Tbar_m alpha)
//                     / [prod_j Gamma(alpha t_j)^(1/m)]^delta
//                     * exp(-delta lambda beta)
//
// Heterogeneous model: y_ij ~ Ga(alpha l, beta_i) on an equally spaced grid.
// The conjugate prior for (alpha, beta_1..beta_n) is the
// approximated-gamma-multivariate-gamma family AGMG(delta1, delta2, omega,
// lambda_1..lambda_n).
//
// omega rides in log space everywhere: the geometric-mean products that feed
// it underflow long before realistic m*n.

namespace gammarul {

class AggParams {
 public:
  AggParams(double delta, double omega, double lambda, MeasurementGrid grid)
      : AggParams(log_omega_tag{}, delta, std::log(omega), lambda, std::move(grid)) {
    if (!(omega > 0.0))
      throw validation_error("AggParams: omega must be positive");
  }

  static AggParams with_log_omega(double delta, double log_omega, double lambda,
                                  MeasurementGrid grid) {
    return AggParams(log_omega_tag{}, delta, log_omega, lambda, std::move(grid));
  }

  double delta() const { return delta_; }
  double omega() const { return std::exp(log_omega_); }
  double log_omega() const { return log_omega_; }
  double lambda() const { return lambda_; }
  const MeasurementGrid& grid() const { return grid_; }

  // Proper alpha marginal: needs positive kurtosis and omega < lambda.
  bool is_proper() const { return delta_ > 0.0 && log_omega_ < std::log(lambda_); }

  void require_proper(const std::string& who) const {
    if (delta_ <= 0.0)
      throw properness_error(who + ": delta must be positive for a proper density");
    if (!(log_omega_ < std::log(lambda_)))
      throw properness_error(who +
                             ": improper parameters, the condition omega < lambda fails "
                             "(omega = " + std::to_string(omega()) +
                             ", lambda = " + std::to_string(lambda_) + ")");
  }

 private:
  struct log_omega_tag {};
  AggParams(log_omega_tag, double delta, double log_omega, double lambda,
            MeasurementGrid grid)
      : delta_(delta), log_omega_(log_omega), lambda_(lambda), grid_(std::move(grid)) {
    if (!std::isfinite(delta_) || delta_ < 0.0)
      throw validation_error("AggParams: delta must be nonnegative");
    if (!std::isfinite(log_omega_))
      throw validation_error("AggParams: omega must be positive and finite");
    if (!std::isfinite(lambda_) || lambda_ <= 0.0)
      throw validation_error("AggParams: lambda must be positive");
  }

  double delta_;
  double log_omega_;
  double lambda_;
  MeasurementGrid grid_;
};

class AgmgParams {
 public:
  AgmgParams(double delta1, double delta2, double omega, std::vector<double> lambdas,
             double spacing)
      : AgmgParams(log_omega_tag{}, delta1, delta2, std::log(omega), std::move(lambdas),
                   spacing) {
    if (!(omega > 0.0))
      throw validation_error("AgmgParams: omega must be positive");
  }

  static AgmgParams with_log_omega(double delta1, double delta2, double log_omega,
                                   std::vector<double> lambdas, double spacing) {
    return AgmgParams(log_omega_tag{}, delta1, delta2, log_omega, std::move(lambdas),
                      spacing);
  }

  double delta1() const { return delta1_; }
  double delta2() const { return delta2_; }
  double omega() const { return std::exp(log_omega_); }
  double log_omega() const { return log_omega_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  double spacing() const { return spacing_; }
  std::size_t units() const { return lambdas_.size(); }  // n

 private:
  struct log_omega_tag {};
  AgmgParams(log_omega_tag, double delta1, double delta2, double log_omega,
             std::vector<double> lambdas, double spacing)
      : delta1_(delta1),
        delta2_(delta2),
        log_omega_(log_omega),
        lambdas_(std::move(lambdas)),
        spacing_(spacing) {
    if (!std::isfinite(delta1_) || delta1_ < 0.0 || !std::isfinite(delta2_) || delta2_ < 0.0)
      throw validation_error("AgmgParams: delta1 and delta2 must be nonnegative");
    if (!std::isfinite(log_omega_))
      throw validation_error("AgmgParams: omega must be positive and finite");
    if (lambdas_.empty())
      throw validation_error("AgmgParams: need at least one unit scale");
    for (double lam : lambdas_)
      if (!std::isfinite(lam) || lam <= 0.0)
        throw validation_error("AgmgParams: lambdas must be positive");
    if (!std::isfinite(spacing_) || spacing_ <= 0.0)
      throw validation_error("AgmgParams: spacing must be positive");
  }

  double delta1_;
  double delta2_;
  double log_omega_;
  std::vector<double> lambdas_;
  double spacing_;
};

/// ln(prod_j t_j^(t_j/T_m) / Tbar_m) >= 0, the part of the alpha tail rate
/// contributed by unequal spacing. Exactly 0 on equally spaced grids.
inline double jensen_gap(const MeasurementGrid& grid) {
  if (grid.equal_spacing()) return 0.0;
  const double horizon = grid.horizon();
  double acc = 0.0;
  for (double t : grid.lags()) acc += t / horizon * std::log(t);
  return acc - std::log(grid.mean_lag());
}

/// Rate of the gamma distribution matching the alpha-marginal tail,
/// delta * Tbar_m * [ln(lambda/omega) + jensen_gap]. Positive for proper
/// parameters; this is also the instrumental rate used by importance
/// resampling.
inline double tail_rate_agg(const AggParams& p) {
  p.require_proper("tail_rate_agg");
  return p.delta() * p.grid().mean_lag() *
         (std::log(p.lambda()) - p.log_omega() + jensen_gap(p.grid()));
}

/// Shape of the matching tail gamma, (delta + 3) / 2.
inline double tail_shape_agg(const AggParams& p) {
  p.require_proper("tail_shape_agg");
  return 0.5 * (p.delta() + 3.0);
}

/// Tail rate of the AGMG alpha marginal,
/// A = delta1 l [ln(n delta2 / delta1) + (1/n) sum ln(lambda_i / omega)].
/// May be nonpositive for degenerate states (e.g. a single flat-prior
/// measurement); samplers reject those.
inline double tail_rate_agmg(const AgmgParams& p) {
  if (!(p.delta1() > 0.0))
    throw properness_error("tail_rate_agmg: delta1 must be positive");
  const double n = static_cast<double>(p.units());
  if (!(p.delta2() > 0.0)) return -std::numeric_limits<double>::infinity();
  double mean_log_lambda = 0.0;
  for (double lam : p.lambdas()) mean_log_lambda += std::log(lam);
  mean_log_lambda /= n;
  return p.delta1() * p.spacing() *
         (std::log(n * p.delta2() / p.delta1()) + mean_log_lambda - p.log_omega());
}

/// Data-driven AGG hyperparameters: omega = weighted geometric mean,
/// lambda = arithmetic mean of the increments.
inline AggParams auto_hyperparams(const DegradationDataset& data, double delta) {
  if (!std::isfinite(delta) || delta < 0.0)
    throw validation_error("auto_hyperparams: delta must be nonnegative");
  const SufficientStats s = sufficient_stats(data);
  AggParams prior =
      AggParams::with_log_omega(delta, s.log_weighted_gmean, s.ybar_a, data.grid());
  if (delta > 0.0) prior.require_proper("auto_hyperparams");
  return prior;
}

/// Data-driven AGMG hyperparameters: omega = pooled geometric mean,
/// lambda_i = per-unit arithmetic means. Equal spacing required.
inline AgmgParams auto_hyperparams_agmg(const DegradationDataset& data, double delta1,
                                        double delta2) {
  if (!data.grid().equal_spacing())
    throw validation_error("auto_hyperparams_agmg: heterogeneous model requires an "
                           "equally spaced grid");
  const SufficientStats s = sufficient_stats(data);
  AgmgParams prior = AgmgParams::with_log_omega(delta1, delta2, s.log_pooled_gmean,
                                                s.per_unit_means, data.grid().spacing());
  if (delta1 > 0.0 && !(tail_rate_agmg(prior) > 0.0))
    throw properness_error("auto_hyperparams_agmg: improper prior, the alpha-marginal "
                           "tail rate is not positive");
  return prior;
}

/// Batch posterior update of an AGG prior:
///   delta_p  = m n + delta
///   omega_p  = omega^(delta/delta_p) * weighted_gmean^(mn/delta_p)
///   lambda_p = (m n ybar_a + delta lambda) / delta_p
inline AggParams posterior_update_agg(const AggParams& prior,
                                      const DegradationDataset& data) {
  if (!prior.grid().same_pattern(data.grid()))
    throw shape_error("posterior_update_agg: prior and data measurement grids differ");
  const SufficientStats s = sufficient_stats(data);
  const double mn = static_cast<double>(data.units()) * static_cast<double>(data.grid().size());
  const double delta_p = mn + prior.delta();
  const double log_omega_p =
      (prior.delta() * prior.log_omega() + mn * s.log_weighted_gmean) / delta_p;
  const double lambda_p = (mn * s.ybar_a + prior.delta() * prior.lambda()) / delta_p;
  return AggParams::with_log_omega(delta_p, log_omega_p, lambda_p, data.grid());
}

/// Batch posterior update of an AGMG prior:
///   delta1_p = m n + delta1,  delta2_p = m + delta2
///   omega_p  = omega^(delta1/delta1_p) * pooled_gmean^(mn/delta1_p)
///   lambda_ip = (m ybar_i + delta2 lambda_i) / delta2_p
inline AgmgParams posterior_update_agmg(const AgmgParams& prior,
                                        const DegradationDataset& data) {
  if (!data.grid().equal_spacing())
    throw validation_error("posterior_update_agmg: heterogeneous model requires an "
                           "equally spaced grid");
  const double l = data.grid().spacing();
  if (std::fabs(l - prior.spacing()) > 1e-9 * std::max(l, prior.spacing()))
    throw shape_error("posterior_update_agmg: prior spacing does not match data spacing");
  if (prior.units() != data.units())
    throw shape_error("posterior_update_agmg: prior has " + std::to_string(prior.units()) +
                      " units, data has " + std::to_string(data.units()));
  const SufficientStats s = sufficient_stats(data);
  const double m = static_cast<double>(data.grid().size());
  const double n = static_cast<double>(data.units());
  const double d1p = m * n + prior.delta1();
  const double d2p = m + prior.delta2();
  const double log_omega_p =
      (prior.delta1() * prior.log_omega() + m * n * s.log_pooled_gmean) / d1p;
  std::vector<double> lambdas_p(prior.units());
  for (std::size_t i = 0; i < lambdas_p.size(); ++i)
    lambdas_p[i] =
        (m * s.per_unit_means[i] + prior.delta2() * prior.lambdas()[i]) / d2p;
  return AgmgParams::with_log_omega(d1p, d2p, log_omega_p, std::move(lambdas_p), l);
}

// AGMG posterior carried through the one-epoch-at-a-time recursion. The
// omega and lambda update weights count measurements relative to the
// originating prior, so the prior's kurtosis pair rides along.
struct RecursiveAgmg {
  AgmgParams params;
  double prior_delta1 = 0.0;
  double prior_delta2 = 0.0;
  std::size_t measurements = 0;  // m absorbed so far
};

inline RecursiveAgmg begin_recursion(const AgmgParams& prior) {
  return RecursiveAgmg{prior, prior.delta1(), prior.delta2(), 0};
}

/// Absorb one epoch of increments (one value per unit):
///   delta1 += n, delta2 += 1
///   ln omega <- [(m n + delta1_0) ln omega + sum_i ln y_i] / ((m+1) n + delta1_0)
///   lambda_i <- ((m + delta2_0) lambda_i + y_i) / (m + 1 + delta2_0)
inline RecursiveAgmg recursive_update(const RecursiveAgmg& state,
                                      std::span<const double> increments) {
  const std::size_t n = state.params.units();
  if (increments.size() != n)
    throw shape_error("recursive_update: expected " + std::to_string(n) +
                      " increments, got " + std::to_string(increments.size()));
  double log_prod = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(increments[i]) || increments[i] <= 0.0)
      throw domain_error("recursive_update: increments must be strictly positive (unit " +
                         std::to_string(i + 1) + ")");
    log_prod += std::log(increments[i]);
  }
  const double m = static_cast<double>(state.measurements);
  const double nn = static_cast<double>(n);
  const double denom = (m + 1.0) * nn + state.prior_delta1;
  const double log_omega_next =
      (state.params.log_omega() * (m * nn + state.prior_delta1) + log_prod) / denom;
  std::vector<double> lambdas_next(n);
  for (std::size_t i = 0; i < n; ++i)
    lambdas_next[i] = ((m + state.prior_delta2) * state.params.lambdas()[i] + increments[i]) /
                      (m + 1.0 + state.prior_delta2);
  AgmgParams next = AgmgParams::with_log_omega(
      state.params.delta1() + nn, state.params.delta2() + 1.0, log_omega_next,
      std::move(lambdas_next), state.params.spacing());
  return RecursiveAgmg{std::move(next), state.prior_delta1, state.prior_delta2,
                       state.measurements + 1};
}

}  // namespace gammarul

// --- JSON state documents -------------------------------------------------

template <>
struct nlohmann::adl_serializer<gammarul::AggParams> {
  static void to_json(json& j, const gammarul::AggParams& p) {
    j = json{{"delta", p.delta()},
             {"omega_log", p.log_omega()},
             {"lambda", p.lambda()},
             {"epochs", p.grid().epochs()}};
  }
  static gammarul::AggParams from_json(const json& j) {
    return gammarul::AggParams::with_log_omega(
        j.at("delta").get<double>(), j.at("omega_log").get<double>(),
        j.at("lambda").get<double>(),
        gammarul::MeasurementGrid(j.at("epochs").get<std::vector<double>>()));
  }
};

template <>
struct nlohmann::adl_serializer<gammarul::AgmgParams> {
  static void to_json(json& j, const gammarul::AgmgParams& p) {
    j = json{{"delta1", p.delta1()},         {"delta2", p.delta2()},
             {"omega_log", p.log_omega()},   {"lambdas", p.lambdas()},
             {"spacing", p.spacing()},       {"n", p.units()}};
  }
  static gammarul::AgmgParams from_json(const json& j) {
    auto p = gammarul::AgmgParams::with_log_omega(
        j.at("delta1").get<double>(), j.at("delta2").get<double>(),
        j.at("omega_log").get<double>(), j.at("lambdas").get<std::vector<double>>(),
        j.at("spacing").get<double>());
    if (j.at("n").get<std::size_t>() != p.units())
      throw gammarul::validation_error("AgmgParams state: n does not match lambdas length");
    return p;
  }
};

template <>
struct nlohmann::adl_serializer<gammarul::RecursiveAgmg> {
  static void to_json(json& j, const gammarul::RecursiveAgmg& s) {
    j = s.params;
    j["m"] = s.measurements;
    j["prior_delta1"] = s.prior_delta1;
    j["prior_delta2"] = s.prior_delta2;
  }
  static gammarul::RecursiveAgmg from_json(const json& j) {
    return gammarul::RecursiveAgmg{j.get<gammarul::AgmgParams>(),
                                   j.at("prior_delta1").get<double>(),
                                   j.at("prior_delta2").get<double>(),
                                   j.at("m").get<std::size_t>()};
  }
};
