#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gammarul/conjugate.hpp"
#include "gammarul/data.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/lifetime.hpp"
#include "gammarul/marginal.hpp"
#include "gammarul/samplers.hpp"

// Streaming fleet state: one recursive posterior update per measurement
// epoch, per-unit cumulative degradation, failure bookkeeping, and the
// replay driver that re-runs a recorded dataset as if it were arriving live.
// Storage is O(n) regardless of how many epochs have been absorbed.

namespace gammarul {

enum class SamplerKind { gibbs, dgs, sir };

inline SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "gs" || s == "gibbs") return SamplerKind::gibbs;
  if (s == "dgs") return SamplerKind::dgs;
  if (s == "sir") return SamplerKind::sir;
  throw config_error("unknown sampler '" + s + "' (expected gs, dgs or sir)");
}

inline std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::gibbs: return "gs";
    case SamplerKind::dgs: return "dgs";
    default: return "sir";
  }
}

struct FailureRecord {
  std::size_t unit_index = 0;
  std::string unit_id;
  std::size_t epoch_index = 0;  // 1-based measurement count at detection
  double time = 0.0;            // linearly interpolated crossing time
};

/// First threshold crossing of a cumulative path, linearly interpolated
/// within the crossing interval; an exact hit returns that epoch.
inline double interpolate_failure_time(std::span<const double> path,
                                       const MeasurementGrid& grid, double threshold) {
  if (path.size() != grid.size())
    throw shape_error("interpolate_failure_time: path length does not match grid");
  if (!(threshold > 0.0))
    throw validation_error("interpolate_failure_time: threshold must be positive");
  double prev_y = 0.0;
  double prev_t = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (path[j] >= threshold) {
      if (path[j] == threshold) return grid.epochs()[j];
      return prev_t + (threshold - prev_y) / (path[j] - prev_y) *
                          (grid.epochs()[j] - prev_t);
    }
    prev_y = path[j];
    prev_t = grid.epochs()[j];
  }
  throw not_failed_error("interpolate_failure_time: path never reaches the threshold");
}

class OnlineState {
 public:
  OnlineState(const AgmgParams& prior, Threshold threshold,
              std::vector<std::string> unit_ids = {})
      : posterior_(begin_recursion(prior)),
        threshold_(threshold.value),
        cumulative_(prior.units(), 0.0),
        failed_(prior.units()),
        unit_ids_(std::move(unit_ids)) {
    if (unit_ids_.empty()) {
      unit_ids_.reserve(prior.units());
      for (std::size_t i = 0; i < prior.units(); ++i)
        unit_ids_.push_back(std::to_string(i + 1));
    }
    if (unit_ids_.size() != prior.units())
      throw shape_error("OnlineState: unit id count does not match prior dimension");
  }

  std::size_t units() const { return cumulative_.size(); }
  std::size_t measurements() const { return posterior_.measurements; }
  double epoch() const {
    return static_cast<double>(posterior_.measurements) * posterior_.params.spacing();
  }
  double threshold() const { return threshold_; }
  const AgmgParams& posterior() const { return posterior_.params; }
  const RecursiveAgmg& recursion() const { return posterior_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  bool failed(std::size_t i) const { return failed_[i].has_value(); }
  const std::optional<FailureRecord>& failure(std::size_t i) const { return failed_[i]; }

  /// Absorb one epoch of increments. Increments from already-failed units
  /// still feed the shared posterior (the process does not stop at the
  /// threshold), but those units get no further predictions.
  void ingest(std::span<const double> increments) {
    posterior_ = recursive_update(posterior_, increments);
    const double l = posterior_.params.spacing();
    const double t_now = epoch();
    for (std::size_t i = 0; i < cumulative_.size(); ++i) {
      const double before = cumulative_[i];
      cumulative_[i] += increments[i];
      if (!failed_[i] && cumulative_[i] >= threshold_) {
        const double frac = (threshold_ - before) / increments[i];
        failed_[i] = FailureRecord{i, unit_ids_[i], posterior_.measurements,
                                   t_now - l + frac * l};
      }
    }
  }

 private:
  RecursiveAgmg posterior_;
  double threshold_;
  std::vector<double> cumulative_;
  std::vector<std::optional<FailureRecord>> failed_;
  std::vector<std::string> unit_ids_;

  friend struct nlohmann::adl_serializer<OnlineState>;
};

// Per-unit outcome of a prediction pass: a remaining-life prediction for
// surviving units, the failure record otherwise.
struct UnitStatus {
  std::string unit_id;
  std::size_t unit_index = 0;
  bool failed = false;
  RulPrediction prediction;
  FailureRecord failure;
};

inline PosteriorDraws sample_posterior(const AgmgParams& posterior, SamplerKind kind,
                                       const SamplerConfig& cfg, RngStream& rng) {
  if (kind == SamplerKind::gibbs)
    throw config_error("heterogeneous posteriors are sampled with dgs or sir");
  const MarginalAlphaDensity marginal = make_alpha_marginal(posterior);
  const BetaConditional cond = make_beta_conditional(posterior);
  return kind == SamplerKind::dgs ? dgs_sample(marginal, cond, cfg, rng)
                                  : sir_sample(marginal, cond, cfg, rng);
}

/// Sample the current posterior and predict remaining life for every
/// surviving unit; failed units are reported with their crossing record.
inline std::vector<UnitStatus> predict(const OnlineState& state, SamplerKind kind,
                                       const SamplerConfig& cfg, RngStream& rng) {
  if (state.measurements() == 0)
    throw config_error("predict: no measurements ingested yet");
  const PosteriorDraws draws = sample_posterior(state.posterior(), kind, cfg, rng);
  const double rho = 1.0 - cfg.credible_level;

  std::vector<UnitStatus> out(state.units());
  for (std::size_t i = 0; i < state.units(); ++i) {
    out[i].unit_id = state.unit_ids()[i];
    out[i].unit_index = i;
    if (state.failed(i)) {
      out[i].failed = true;
      out[i].failure = *state.failure(i);
      continue;
    }
    out[i].prediction =
        mc_rul_predict(draws, i, state.threshold(), state.cumulative()[i], rho);
    out[i].prediction.unit_id = state.unit_ids()[i];
    out[i].prediction.epoch = state.epoch();
  }
  return out;
}

struct ReplayPoint {
  double epoch = 0.0;
  std::string unit_id;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> true_rul;  // interpolated failure time minus epoch
};

struct ParamTrack {
  double epoch = 0.0;
  double alpha_hat = 0.0;
  std::vector<double> beta_hats;
};

struct ReplayResult {
  std::vector<ReplayPoint> trajectory;  // surviving units only
  std::vector<ParamTrack> params;
  std::vector<FailureRecord> failures;
  std::vector<std::string> unit_ids;
};

/// Re-run a recorded fleet as a stream: ingest epochs up to start_epoch,
/// then alternate predict / ingest to the end of the data. Deterministic
/// for a fixed seed; epoch m uses the stream id m.
inline ReplayResult replay(const DegradationDataset& data, Threshold threshold,
                           double delta1, double delta2, std::size_t start_epoch,
                           SamplerKind kind, const SamplerConfig& cfg,
                           std::uint64_t seed) {
  const std::size_t m_total = data.grid().size();
  if (start_epoch < 1 || start_epoch > m_total)
    throw config_error("replay: start epoch must lie in [1, " + std::to_string(m_total) +
                       "]");
  if (!data.grid().equal_spacing())
    throw validation_error("replay: heterogeneous model requires an equally spaced grid");

  // Data-driven hyperparameters are taken from the measurements available at
  // prediction start; with zero kurtosis they carry no weight at all.
  const AgmgParams prior =
      auto_hyperparams_agmg(data.head(start_epoch), delta1, delta2);
  OnlineState state(prior, threshold, data.unit_ids());

  // True remaining life is only known for units that eventually cross.
  std::vector<std::optional<double>> fail_time(data.units());
  for (std::size_t i = 0; i < data.units(); ++i) {
    try {
      fail_time[i] = interpolate_failure_time(data.path(i), data.grid(), threshold.value);
    } catch (const not_failed_error&) {
    }
  }

  ReplayResult out;
  out.unit_ids = data.unit_ids();
  const double rho = 1.0 - cfg.credible_level;
  for (std::size_t j = 0; j < m_total; ++j) {
    state.ingest(data.epoch_increments(j));
    const std::size_t m = j + 1;
    if (m < start_epoch) continue;

    RngStream rng(seed, m);
    const PosteriorDraws draws = sample_posterior(state.posterior(), kind, cfg, rng);

    ParamTrack track;
    track.epoch = state.epoch();
    track.alpha_hat = 0.0;
    for (double a : draws.alpha) track.alpha_hat += a;
    track.alpha_hat /= static_cast<double>(draws.size());
    track.beta_hats.assign(data.units(), 0.0);
    for (std::size_t k = 0; k < draws.size(); ++k)
      for (std::size_t i = 0; i < data.units(); ++i)
        track.beta_hats[i] += draws.beta(k, i);
    for (double& b : track.beta_hats) b /= static_cast<double>(draws.size());
    out.params.push_back(std::move(track));

    for (std::size_t i = 0; i < data.units(); ++i) {
      if (state.failed(i)) continue;
      RulPrediction pred =
          mc_rul_predict(draws, i, threshold.value, state.cumulative()[i], rho);
      ReplayPoint pt;
      pt.epoch = state.epoch();
      pt.unit_id = data.unit_ids()[i];
      pt.point = pred.point;
      pt.lower = pred.lower;
      pt.upper = pred.upper;
      if (fail_time[i]) pt.true_rul = *fail_time[i] - state.epoch();
      out.trajectory.push_back(std::move(pt));
    }
  }
  for (std::size_t i = 0; i < data.units(); ++i)
    if (state.failed(i)) out.failures.push_back(*state.failure(i));
  return out;
}

}  // namespace gammarul

template <>
struct nlohmann::adl_serializer<gammarul::OnlineState> {
  static void to_json(json& j, const gammarul::OnlineState& s) {
    j = s.posterior_;
    j["threshold"] = s.threshold_;
    j["cumulative"] = s.cumulative_;
    j["unit_ids"] = s.unit_ids_;
    json failures = json::array();
    for (const auto& f : s.failed_)
      if (f)
        failures.push_back(json{{"unit", f->unit_index},
                                {"unit_id", f->unit_id},
                                {"epoch", f->epoch_index},
                                {"time", f->time}});
    j["failed"] = failures;
  }
  static gammarul::OnlineState from_json(const json& j) {
    auto recursion = j.get<gammarul::RecursiveAgmg>();
    gammarul::OnlineState s(recursion.params,
                            gammarul::Threshold(j.at("threshold").get<double>()),
                            j.at("unit_ids").get<std::vector<std::string>>());
    s.posterior_ = std::move(recursion);
    s.cumulative_ = j.at("cumulative").get<std::vector<double>>();
    if (s.cumulative_.size() != s.units())
      throw gammarul::validation_error("online state: cumulative length mismatch");
    for (const auto& f : j.at("failed")) {
      gammarul::FailureRecord rec{f.at("unit").get<std::size_t>(),
                                  f.at("unit_id").get<std::string>(),
                                  f.at("epoch").get<std::size_t>(),
                                  f.at("time").get<double>()};
      if (rec.unit_index >= s.units())
        throw gammarul::validation_error("online state: failure record out of range");
      s.failed_[rec.unit_index] = rec;
    }
    return s;
  }
};
