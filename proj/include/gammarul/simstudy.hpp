#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gammarul/conjugate.hpp"
#include "gammarul/data.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/lifetime.hpp"
#include "gammarul/marginal.hpp"
#include "gammarul/online.hpp"
#include "gammarul/rng.hpp"
#include "gammarul/samplers.hpp"

// Monte Carlo evaluation harness: generate gamma-process fleets at known
// parameters, fit them with each sampler, and score the estimators with
// RB, RMSE, mean credible-interval length and frequentist coverage.

namespace gammarul {

struct Scenario {
  double true_alpha = 0.031;
  double true_beta = 15.35;
  std::size_t units = 15;         // n
  std::size_t measurements = 16;  // m
  double spacing = 250.0;         // l
  double threshold = 10.0;
  std::vector<double> deltas = {0.0};           // literal kurtosis values
  std::vector<double> delta_fractions = {};     // resolved as fraction * m
  std::vector<SamplerKind> samplers = {SamplerKind::dgs};
  std::size_t replications = 500;  // N
  std::uint64_t base_seed = 1;
  double reliability_time = 4500.0;
  SamplerConfig sampler_cfg;
  bool exact_cdf_truth = false;  // switch for the true R(t) / MTTF reference

  std::vector<double> resolved_deltas() const {
    std::vector<double> out = deltas;
    for (double f : delta_fractions) out.push_back(f * static_cast<double>(measurements));
    if (out.empty()) throw config_error("scenario: no delta values given");
    return out;
  }

  void validate() const {
    if (!(true_alpha > 0.0) || !(true_beta > 0.0))
      throw config_error("scenario: true parameters must be positive");
    if (units == 0 || measurements == 0)
      throw config_error("scenario: units and measurements must be >= 1");
    if (!(spacing > 0.0) || !(threshold > 0.0))
      throw config_error("scenario: spacing and threshold must be positive");
    if (replications == 0) throw config_error("scenario: replications must be >= 1");
    if (samplers.empty()) throw config_error("scenario: no samplers selected");
    resolved_deltas();
    sampler_cfg.validate();
  }
};

struct MetricsRow {
  std::string sampler;
  double delta = 0.0;
  std::string parameter;  // alpha | beta | reliability | mttf
  double truth = 0.0;
  double rb = 0.0;
  double rmse = 0.0;
  double mean_length = 0.0;
  double fcp = 0.0;
  std::size_t replications_used = 0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  std::size_t failed_replications = 0;
};

struct ParamScore {
  double rb = 0.0;
  double rmse = 0.0;
  double mean_length = 0.0;
  double fcp = 0.0;
};

/// RB here is the magnitude of the relative bias of the point estimator,
/// |mean(estimates) - truth| / truth; RMSE, interval length and coverage
/// are the usual Monte Carlo summaries.
inline ParamScore score_metrics(std::span<const double> points,
                                std::span<const Estimate> intervals, double truth) {
  if (points.empty() || points.size() != intervals.size())
    throw shape_error("score_metrics: need matching, nonempty estimate arrays");
  double mean = 0.0;
  double sq = 0.0;
  double len = 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    mean += points[i];
    sq += (points[i] - truth) * (points[i] - truth);
    len += intervals[i].upper - intervals[i].lower;
    if (intervals[i].lower <= truth && truth <= intervals[i].upper) ++covered;
  }
  const double n = static_cast<double>(points.size());
  return ParamScore{std::fabs(mean / n - truth) / std::fabs(truth), std::sqrt(sq / n),
                    len / n, static_cast<double>(covered) / n};
}

/// Fleet generated from the scenario truth; reproducible per
/// (base_seed, replication).
inline DegradationDataset generate_dataset(const Scenario& sc, std::size_t replication) {
  sc.validate();
  RngStream rng(sc.base_seed, replication * 16);
  const double shape = sc.true_alpha * sc.spacing;
  std::vector<std::vector<double>> inc(sc.units, std::vector<double>(sc.measurements));
  for (std::size_t i = 0; i < sc.units; ++i)
    for (std::size_t j = 0; j < sc.measurements; ++j)
      inc[i][j] = sample_gamma(shape, sc.true_beta, rng);
  return DegradationDataset(MeasurementGrid::equally_spaced(sc.measurements, sc.spacing),
                            std::move(inc));
}

namespace detail {

inline std::size_t thread_budget(std::size_t tasks) {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GAMMARUL_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) hw = static_cast<std::size_t>(parsed);
  }
  return std::min(hw, tasks);
}

inline constexpr std::size_t kParamCount = 4;
inline const char* param_name(std::size_t p) {
  constexpr const char* names[kParamCount] = {"alpha", "beta", "reliability", "mttf"};
  return names[p];
}

}  // namespace detail

/// Run every replication of the scenario and aggregate per
/// (sampler, delta, parameter). Replications run in parallel over disjoint
/// random streams; a replication that throws is counted and excluded.
inline MetricsTable run_scenario(const Scenario& sc) {
  sc.validate();
  const std::vector<double> deltas = sc.resolved_deltas();
  const std::size_t n_cells = deltas.size() * sc.samplers.size();
  if (n_cells > 15)
    throw config_error("scenario: at most 15 sampler-delta combinations per run");
  const std::size_t N = sc.replications;
  const double rho = 1.0 - sc.sampler_cfg.credible_level;

  // estimates[cell][param][rep]
  std::vector<std::vector<std::vector<double>>> points(
      n_cells, std::vector<std::vector<double>>(detail::kParamCount,
                                                std::vector<double>(N, 0.0)));
  std::vector<std::vector<std::vector<Estimate>>> intervals(
      n_cells, std::vector<std::vector<Estimate>>(detail::kParamCount,
                                                  std::vector<Estimate>(N)));
  std::vector<char> ok(N, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::mutex error_mutex;
  std::optional<std::string> first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= N) return;
      try {
        const DegradationDataset data = generate_dataset(sc, rep);
        std::size_t cell = 0;
        for (double delta : deltas) {
          const AggParams prior = auto_hyperparams(data, delta);
          const AggParams post = posterior_update_agg(prior, data);
          const MarginalAlphaDensity marginal = make_alpha_marginal(post);
          const BetaConditional cond = make_beta_conditional(post);
          for (SamplerKind kind : sc.samplers) {
            RngStream rng(sc.base_seed, rep * 16 + 1 + cell);
            PosteriorDraws draws;
            switch (kind) {
              case SamplerKind::gibbs: draws = gibbs_sample(post, sc.sampler_cfg, rng); break;
              case SamplerKind::dgs: draws = dgs_sample(marginal, cond, sc.sampler_cfg, rng); break;
              case SamplerKind::sir: draws = sir_sample(marginal, cond, sc.sampler_cfg, rng); break;
            }
            const Estimate est[detail::kParamCount] = {
                summarize(draws, functional_alpha(), rho),
                summarize(draws, functional_beta(), rho),
                summarize(draws,
                          functional_reliability(sc.reliability_time, sc.threshold,
                                                 sc.exact_cdf_truth),
                          rho),
                summarize(draws, functional_mttf(sc.threshold), rho)};
            for (std::size_t p = 0; p < detail::kParamCount; ++p) {
              points[cell][p][rep] = est[p].point;
              intervals[cell][p][rep] = est[p];
            }
            ++cell;
          }
        }
        ok[rep] = 1;
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = e.what();
      }
    }
  };

  const std::size_t n_threads = detail::thread_budget(N);
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (failures.load() == N)
    throw numeric_error("run_scenario: every replication failed; first error: " +
                        first_error.value_or("unknown"));

  const double truths[detail::kParamCount] = {
      sc.true_alpha, sc.true_beta,
      reliability(sc.reliability_time, sc.true_alpha, sc.true_beta, sc.threshold,
                  sc.exact_cdf_truth),
      mttf(sc.true_alpha, sc.true_beta, sc.threshold)};

  MetricsTable table;
  table.failed_replications = failures.load();
  std::size_t cell = 0;
  for (double delta : deltas) {
    for (SamplerKind kind : sc.samplers) {
      for (std::size_t p = 0; p < detail::kParamCount; ++p) {
        std::vector<double> pts;
        std::vector<Estimate> ints;
        pts.reserve(N);
        ints.reserve(N);
        for (std::size_t rep = 0; rep < N; ++rep) {
          if (!ok[rep]) continue;
          pts.push_back(points[cell][p][rep]);
          ints.push_back(intervals[cell][p][rep]);
        }
        const ParamScore score = score_metrics(pts, ints, truths[p]);
        table.rows.push_back(MetricsRow{to_string(kind), delta, detail::param_name(p),
                                        truths[p], score.rb, score.rmse,
                                        score.mean_length, score.fcp, pts.size()});
      }
      ++cell;
    }
  }
  return table;
}

// --- scenario / metrics JSON ------------------------------------------------

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.true_alpha = j.at("true_alpha").get<double>();
  sc.true_beta = j.at("true_beta").get<double>();
  sc.units = j.at("units").get<std::size_t>();
  sc.measurements = j.at("measurements").get<std::size_t>();
  sc.spacing = j.at("spacing").get<double>();
  sc.threshold = j.at("threshold").get<double>();
  if (j.contains("deltas")) sc.deltas = j.at("deltas").get<std::vector<double>>();
  else sc.deltas.clear();
  if (j.contains("delta_fractions"))
    sc.delta_fractions = j.at("delta_fractions").get<std::vector<double>>();
  sc.samplers.clear();
  for (const auto& s : j.at("samplers"))
    sc.samplers.push_back(sampler_kind_from_string(s.get<std::string>()));
  sc.replications = j.at("replications").get<std::size_t>();
  sc.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("reliability_time"))
    sc.reliability_time = j.at("reliability_time").get<double>();
  if (j.contains("draws")) sc.sampler_cfg.draws = j.at("draws").get<std::size_t>();
  if (j.contains("pool")) sc.sampler_cfg.pool = j.at("pool").get<std::size_t>();
  if (j.contains("burn_in")) sc.sampler_cfg.burn_in = j.at("burn_in").get<std::size_t>();
  if (j.contains("thin")) sc.sampler_cfg.thin = j.at("thin").get<std::size_t>();
  if (j.contains("credible_level"))
    sc.sampler_cfg.credible_level = j.at("credible_level").get<double>();
  if (j.contains("exact_cdf_truth"))
    sc.exact_cdf_truth = j.at("exact_cdf_truth").get<bool>();
  sc.validate();
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j{{"true_alpha", sc.true_alpha},
                   {"true_beta", sc.true_beta},
                   {"units", sc.units},
                   {"measurements", sc.measurements},
                   {"spacing", sc.spacing},
                   {"threshold", sc.threshold},
                   {"deltas", sc.deltas},
                   {"delta_fractions", sc.delta_fractions},
                   {"replications", sc.replications},
                   {"base_seed", sc.base_seed},
                   {"reliability_time", sc.reliability_time},
                   {"draws", sc.sampler_cfg.draws},
                   {"pool", sc.sampler_cfg.pool},
                   {"burn_in", sc.sampler_cfg.burn_in},
                   {"thin", sc.sampler_cfg.thin},
                   {"credible_level", sc.sampler_cfg.credible_level},
                   {"exact_cdf_truth", sc.exact_cdf_truth}};
  nlohmann::json samplers = nlohmann::json::array();
  for (SamplerKind k : sc.samplers) samplers.push_back(to_string(k));
  j["samplers"] = samplers;
  return j;
}

inline nlohmann::json metrics_to_json(const MetricsTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back(nlohmann::json{{"sampler", r.sampler},
                                  {"delta", r.delta},
                                  {"parameter", r.parameter},
                                  {"truth", r.truth},
                                  {"rb", r.rb},
                                  {"rmse", r.rmse},
                                  {"mean_length", r.mean_length},
                                  {"fcp", r.fcp},
                                  {"replications_used", r.replications_used}});
  return nlohmann::json{{"rows", rows},
                        {"failed_replications", table.failed_replications}};
}

}  // namespace gammarul
