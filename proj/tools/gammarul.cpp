// Command-line surface for the gamma-process degradation toolkit: fitting,
// online replay, simulation studies, failure-time interpolation and density
// export. Exit codes: 0 success, 2 configuration error, 3 data validation
// error, 4 numerical/properness error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gammarul/conjugate.hpp"
#include "gammarul/csv.hpp"
#include "gammarul/data.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/lifetime.hpp"
#include "gammarul/marginal.hpp"
#include "gammarul/online.hpp"
#include "gammarul/samplers.hpp"
#include "gammarul/simstudy.hpp"

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

// FNV-1a over the raw file bytes; enough to pin an input in a run report.
std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gammarul::validation_error(path + ": cannot open file");
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gammarul::config_error(path + ": cannot open for writing");
  out << text;
}

void emit_report(const json& report, const std::string& out_path) {
  if (out_path.empty())
    std::cout << report.dump(2) << '\n';
  else
    write_text(out_path, report.dump(2) + "\n");
}

json estimate_to_json(const gammarul::Estimate& e) {
  return json{{"point", e.point}, {"lower", e.lower}, {"upper", e.upper}, {"level", e.level}};
}

struct FitOptions {
  std::string data_path;
  double threshold = 0.0;
  double delta = 1.0;
  std::string sampler = "dgs";
  gammarul::SamplerConfig cfg;
  bool hetero = false;
  std::uint64_t seed = 20260810;
  std::vector<double> reliability_at;
  std::string out_path;
};

int cmd_fit(const FitOptions& opt) {
  using namespace gammarul;
  const auto t0 = std::chrono::steady_clock::now();
  opt.cfg.validate();
  Threshold threshold(opt.threshold);
  const SamplerKind kind = sampler_kind_from_string(opt.sampler);
  const DegradationDataset data = read_long_csv(opt.data_path);
  const double rho = 1.0 - opt.cfg.credible_level;
  RngStream rng(opt.seed, 1);

  json report{{"schema_version", kSchemaVersion},
              {"command", "fit"},
              {"seed", opt.seed},
              {"input", json{{"path", opt.data_path},
                             {"digest", file_digest(opt.data_path)},
                             {"units", data.units()},
                             {"measurements", data.grid().size()}}},
              {"config", json{{"threshold", opt.threshold},
                              {"delta", opt.delta},
                              {"sampler", opt.sampler},
                              {"draws", opt.cfg.draws},
                              {"pool", opt.cfg.pool},
                              {"burn_in", opt.cfg.burn_in},
                              {"thin", opt.cfg.thin},
                              {"level", opt.cfg.credible_level},
                              {"hetero", opt.hetero}}}};

  PosteriorDraws draws;
  json estimates;
  if (!opt.hetero) {
    const AggParams prior = auto_hyperparams(data, opt.delta);
    const AggParams post = posterior_update_agg(prior, data);
    report["posterior"] = post;
    if (kind == SamplerKind::gibbs) {
      draws = gibbs_sample(post, opt.cfg, rng);
    } else {
      const MarginalAlphaDensity marginal = make_alpha_marginal(post);
      const BetaConditional cond = make_beta_conditional(post);
      draws = (kind == SamplerKind::dgs) ? dgs_sample(marginal, cond, opt.cfg, rng)
                                         : sir_sample(marginal, cond, opt.cfg, rng);
    }
    estimates["alpha"] = estimate_to_json(summarize(draws, functional_alpha(), rho));
    estimates["beta"] = estimate_to_json(summarize(draws, functional_beta(), rho));
    estimates["mttf"] =
        estimate_to_json(summarize(draws, functional_mttf(threshold.value), rho));
    json rel = json::array();
    for (double t : opt.reliability_at)
      rel.push_back(json{{"time", t},
                         {"estimate", estimate_to_json(summarize(
                                          draws, functional_reliability(t, threshold.value),
                                          rho))}});
    estimates["reliability"] = rel;
  } else {
    // Heterogeneous fit; the kurtosis pair follows the homogeneous reduction
    // delta1 = delta, delta2 = delta / n.
    const double n = static_cast<double>(data.units());
    const AgmgParams prior = auto_hyperparams_agmg(data, opt.delta, opt.delta / n);
    const AgmgParams post = posterior_update_agmg(prior, data);
    report["posterior"] = post;
    draws = sample_posterior(post, kind, opt.cfg, rng);
    estimates["alpha"] = estimate_to_json(summarize(draws, functional_alpha(), rho));
    json units = json::array();
    for (std::size_t i = 0; i < data.units(); ++i) {
      json u{{"unit_id", data.unit_ids()[i]},
             {"beta", estimate_to_json(summarize(draws, functional_beta(i), rho))},
             {"mttf", estimate_to_json(
                          summarize(draws, functional_mttf(threshold.value, i), rho))}};
      json rel = json::array();
      for (double t : opt.reliability_at)
        rel.push_back(
            json{{"time", t},
                 {"estimate", estimate_to_json(summarize(
                                  draws, functional_reliability(t, threshold.value, false, i),
                                  rho))}});
      u["reliability"] = rel;
      units.push_back(u);
    }
    estimates["units"] = units;
  }

  json diag{{"sampler_tag", draws.sampler_tag},
            {"draws", draws.size()},
            {"density_evaluations", draws.diagnostics.density_evaluations}};
  if (draws.sampler_tag == "sir") {
    diag["effective_sample_size"] = draws.diagnostics.effective_sample_size;
    diag["degeneracy_warning"] = draws.diagnostics.degeneracy_warning;
  }
  if (draws.sampler_tag == "dgs") {
    diag["support_points"] = draws.diagnostics.support_points;
    diag["resolution_warning"] = draws.diagnostics.resolution_warning;
    diag["tail_mass_bound"] = draws.diagnostics.tail_mass_bound;
  }
  if (draws.sampler_tag == "gs")
    diag["ars_rejections"] = draws.diagnostics.ars_rejections;

  report["estimates"] = estimates;
  report["diagnostics"] = diag;
  report["timing_ms"] = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
  emit_report(report, opt.out_path);
  return 0;
}

struct ReplayOptions {
  std::string data_path;
  double threshold = 0.0;
  std::size_t start_epoch = 2;
  std::string sampler = "dgs";
  double delta1 = 0.0;
  double delta2 = 0.0;
  gammarul::SamplerConfig cfg;
  std::uint64_t seed = 20260810;
  std::string out_prefix = "replay";
};

int cmd_replay(const ReplayOptions& opt) {
  using namespace gammarul;
  const auto t0 = std::chrono::steady_clock::now();
  opt.cfg.validate();
  const SamplerKind kind = sampler_kind_from_string(opt.sampler);
  if (kind == SamplerKind::gibbs)
    throw config_error("replay: choose dgs or sir");
  const DegradationDataset data = read_long_csv(opt.data_path);
  const ReplayResult result = replay(data, Threshold(opt.threshold), opt.delta1,
                                     opt.delta2, opt.start_epoch, kind, opt.cfg, opt.seed);

  const std::string traj_path = opt.out_prefix + "_trajectory.csv";
  const std::string params_path = opt.out_prefix + "_params.csv";
  const std::string failures_path = opt.out_prefix + "_failures.csv";
  {
    std::ofstream out(traj_path);
    if (!out) throw config_error(traj_path + ": cannot open for writing");
    write_trajectory_csv(out, result);
  }
  {
    std::ofstream out(params_path);
    if (!out) throw config_error(params_path + ": cannot open for writing");
    write_params_csv(out, result);
  }
  {
    std::ofstream out(failures_path);
    if (!out) throw config_error(failures_path + ": cannot open for writing");
    write_failures_csv(out, result);
  }

  json report{{"schema_version", kSchemaVersion},
              {"command", "replay"},
              {"seed", opt.seed},
              {"input", json{{"path", opt.data_path},
                             {"digest", file_digest(opt.data_path)},
                             {"units", data.units()},
                             {"measurements", data.grid().size()}}},
              {"config", json{{"threshold", opt.threshold},
                              {"start_epoch", opt.start_epoch},
                              {"sampler", opt.sampler},
                              {"delta1", opt.delta1},
                              {"delta2", opt.delta2},
                              {"draws", opt.cfg.draws},
                              {"pool", opt.cfg.pool},
                              {"level", opt.cfg.credible_level}}},
              {"outputs", json{{"trajectory", traj_path},
                               {"params", params_path},
                               {"failures", failures_path}}},
              {"trajectory_rows", result.trajectory.size()},
              {"failures", result.failures.size()},
              {"timing_ms", std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count()}};
  emit_report(report, opt.out_prefix + "_report.json");
  std::cout << "replay: " << result.trajectory.size() << " trajectory rows, "
            << result.failures.size() << " failures -> " << opt.out_prefix << "_*.csv\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  using namespace gammarul;
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(config_path);
  if (!in) throw config_error(config_path + ": cannot open scenario config");
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw config_error(config_path + ": invalid JSON (" + e.what() + ")");
  }
  Scenario sc;
  try {
    sc = scenario_from_json(config);
  } catch (const json::exception& e) {
    throw config_error(config_path + ": " + e.what());
  }

  const MetricsTable table = run_scenario(sc);
  std::filesystem::create_directories(out_dir);
  const std::string csv_path = (std::filesystem::path(out_dir) / "metrics.csv").string();
  const std::string json_path = (std::filesystem::path(out_dir) / "metrics.json").string();
  {
    std::ofstream out(csv_path);
    if (!out) throw config_error(csv_path + ": cannot open for writing");
    write_metrics_csv(out, table);
  }
  json doc = metrics_to_json(table);
  doc["schema_version"] = kSchemaVersion;
  doc["scenario"] = scenario_to_json(sc);
  doc["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  write_text(json_path, doc.dump(2) + "\n");
  std::cout << "simulate: " << table.rows.size() << " metric rows -> " << csv_path << '\n';
  return 0;
}

int cmd_interp_failure(const std::string& data_path, double threshold_value,
                       const std::string& out_path) {
  using namespace gammarul;
  Threshold threshold(threshold_value);
  const DegradationDataset data = read_long_csv(data_path);
  std::ostringstream out;
  out << "unit_id,failure_time\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < data.units(); ++i) {
    out << data.unit_ids()[i] << ',';
    try {
      out << interpolate_failure_time(data.path(i), data.grid(), threshold.value);
    } catch (const not_failed_error&) {
      out << "not_failed";
    }
    out << '\n';
  }
  if (out_path.empty())
    std::cout << out.str();
  else
    write_text(out_path, out.str());
  return 0;
}

struct DensityOptions {
  double delta = 2.0;
  double omega = 0.5;
  double lambda = 1.5;
  double spacing = 1.0;
  std::size_t grid_points = 200;
  double alpha_max = 0.0;  // 0 = auto from the Laplace fit
  double beta_max = 0.0;
  std::string out_path;
};

int cmd_export_density(const DensityOptions& opt) {
  using namespace gammarul;
  if (opt.grid_points < 2) throw config_error("export-density: need at least 2 grid points");
  const AggParams prior(opt.delta, opt.omega, opt.lambda,
                        MeasurementGrid::equally_spaced(1, opt.spacing));
  prior.require_proper("export-density");

  double alpha_max = opt.alpha_max;
  if (!(alpha_max > 0.0)) {
    const LaplaceFit lf = laplace_fit(make_alpha_marginal(prior));
    alpha_max = lf.mode + 8.0 * lf.sigma;
  }
  double beta_max = opt.beta_max;
  if (!(beta_max > 0.0)) {
    // conditional mode of beta at alpha is Tbar alpha / lambda; leave headroom
    beta_max = 4.0 * prior.grid().mean_lag() * alpha_max / opt.lambda;
  }

  const double dt = opt.delta * prior.grid().mean_lag();
  const double log_omega = prior.log_omega();
  std::ostringstream out;
  out << "alpha,beta,density\n";
  out << std::setprecision(10);
  const std::size_t M = opt.grid_points;
  // log density of the joint prior, max-subtracted across the grid
  std::vector<double> logd(M * M);
  double max_logd = -std::numeric_limits<double>::infinity();
  std::vector<double> alphas(M);
  std::vector<double> betas(M);
  for (std::size_t s = 0; s < M; ++s) {
    alphas[s] = alpha_max * static_cast<double>(s + 1) / static_cast<double>(M);
    betas[s] = beta_max * static_cast<double>(s + 1) / static_cast<double>(M);
  }
  const detail::LagGammaSum lg(prior.grid());
  for (std::size_t ia = 0; ia < M; ++ia)
    for (std::size_t ib = 0; ib < M; ++ib) {
      const double a = alphas[ia];
      const double b = betas[ib];
      const double v = dt * a * (std::log(b) + log_omega) - opt.delta * lg.value(a) -
                       opt.delta * opt.lambda * b;
      logd[ia * M + ib] = v;
      max_logd = std::max(max_logd, v);
    }
  for (std::size_t ia = 0; ia < M; ++ia)
    for (std::size_t ib = 0; ib < M; ++ib)
      out << alphas[ia] << ',' << betas[ib] << ','
          << std::exp(logd[ia * M + ib] - max_logd) << '\n';

  if (opt.out_path.empty())
    std::cout << out.str();
  else
    write_text(opt.out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian gamma-process degradation modeling and RUL prediction"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the conjugate model to degradation data");
  fit_cmd->add_option("--data", fit.data_path, "long-form CSV (unit_id,time,value)")
      ->required();
  fit_cmd->add_option("--threshold", fit.threshold, "failure threshold")->required();
  fit_cmd->add_option("--delta", fit.delta, "prior kurtosis (0 = noninformative)");
  fit_cmd->add_option("--sampler", fit.sampler, "gs | dgs | sir");
  fit_cmd->add_option("--draws", fit.cfg.draws, "posterior sample size K");
  fit_cmd->add_option("--pool", fit.cfg.pool, "grid / importance pool size M");
  fit_cmd->add_option("--burn-in", fit.cfg.burn_in, "Gibbs burn-in B");
  fit_cmd->add_option("--thin", fit.cfg.thin, "Gibbs thinning L");
  fit_cmd->add_option("--level", fit.cfg.credible_level, "credible level");
  fit_cmd->add_flag("--hetero", fit.hetero, "unit-specific scale parameters");
  fit_cmd->add_option("--seed", fit.seed, "random seed");
  fit_cmd->add_option("--reliability-at", fit.reliability_at,
                      "times at which to report R(t); repeatable");
  fit_cmd->add_option("--out", fit.out_path, "report JSON path (default stdout)");

  ReplayOptions rep;
  auto* replay_cmd =
      app.add_subcommand("replay", "Online RUL prediction over a recorded dataset");
  replay_cmd->add_option("--data", rep.data_path, "long-form CSV")->required();
  replay_cmd->add_option("--threshold", rep.threshold, "failure threshold")->required();
  replay_cmd->add_option("--start-epoch", rep.start_epoch, "first prediction epoch");
  replay_cmd->add_option("--sampler", rep.sampler, "dgs | sir");
  replay_cmd->add_option("--delta1", rep.delta1, "prior kurtosis delta1");
  replay_cmd->add_option("--delta2", rep.delta2, "prior kurtosis delta2");
  replay_cmd->add_option("--draws", rep.cfg.draws, "posterior sample size K");
  replay_cmd->add_option("--pool", rep.cfg.pool, "grid / importance pool size M");
  replay_cmd->add_option("--level", rep.cfg.credible_level, "credible level");
  replay_cmd->add_option("--seed", rep.seed, "random seed");
  replay_cmd->add_option("--out", rep.out_prefix, "output path prefix");

  std::string sim_config;
  std::string sim_out = "simstudy_out";
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimator evaluation");
  sim_cmd->add_option("--config", sim_config, "scenario config JSON")->required();
  sim_cmd->add_option("--out", sim_out, "output directory");

  std::string interp_data;
  double interp_threshold = 0.0;
  std::string interp_out;
  auto* interp_cmd =
      app.add_subcommand("interp-failure", "Interpolated threshold-crossing times");
  interp_cmd->add_option("--data", interp_data, "long-form CSV")->required();
  interp_cmd->add_option("--threshold", interp_threshold, "failure threshold")->required();
  interp_cmd->add_option("--out", interp_out, "output CSV path (default stdout)");

  DensityOptions dens;
  auto* dens_cmd =
      app.add_subcommand("export-density", "Unnormalized prior density grid over (alpha, beta)");
  dens_cmd->add_option("--delta", dens.delta, "kurtosis");
  dens_cmd->add_option("--omega", dens.omega, "shape hyperparameter");
  dens_cmd->add_option("--lambda", dens.lambda, "scale hyperparameter");
  dens_cmd->add_option("--spacing", dens.spacing, "measurement lag l");
  dens_cmd->add_option("--grid-points", dens.grid_points, "grid points per axis");
  dens_cmd->add_option("--alpha-max", dens.alpha_max, "alpha range (auto if omitted)");
  dens_cmd->add_option("--beta-max", dens.beta_max, "beta range (auto if omitted)");
  dens_cmd->add_option("--out", dens.out_path, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return cmd_fit(fit);
    if (app.got_subcommand(replay_cmd)) return cmd_replay(rep);
    if (app.got_subcommand(sim_cmd)) return cmd_simulate(sim_config, sim_out);
    if (app.got_subcommand(interp_cmd))
      return cmd_interp_failure(interp_data, interp_threshold, interp_out);
    if (app.got_subcommand(dens_cmd)) return cmd_export_density(dens);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const gammarul::config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const gammarul::validation_error& e) {
    std::cerr << "data validation error: " << e.what() << '\n';
    return 3;
  } catch (const gammarul::numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
