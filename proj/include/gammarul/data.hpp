#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gammarul/errors.hpp"

namespace gammarul {

// Measurement schedule T_1 < ... < T_m shared by every unit, together with
// the derived lags t_j = T_j - T_{j-1} (T_0 = 0).
class MeasurementGrid {
 public:
  explicit MeasurementGrid(std::vector<double> epochs) : epochs_(std::move(epochs)) {
    if (epochs_.empty())
      throw validation_error("measurement grid needs at least one epoch");
    lags_.reserve(epochs_.size());
    double prev = 0.0;
    for (std::size_t j = 0; j < epochs_.size(); ++j) {
      if (!std::isfinite(epochs_[j]) || epochs_[j] <= prev)
        throw validation_error("epochs must be positive and strictly increasing (epoch " +
                               std::to_string(j + 1) + ")");
      lags_.push_back(epochs_[j] - prev);
      prev = epochs_[j];
    }
    const double t1 = lags_.front();
    equal_spacing_ = std::all_of(lags_.begin(), lags_.end(), [t1](double t) {
      return std::fabs(t - t1) <= 1e-9 * t1;
    });
  }

  static MeasurementGrid equally_spaced(std::size_t m, double lag) {
    if (m == 0 || !(lag > 0.0))
      throw validation_error("equally_spaced: need m >= 1 and lag > 0");
    std::vector<double> epochs(m);
    for (std::size_t j = 0; j < m; ++j) epochs[j] = lag * static_cast<double>(j + 1);
    return MeasurementGrid(std::move(epochs));
  }

  std::size_t size() const { return epochs_.size(); }  // m
  const std::vector<double>& epochs() const { return epochs_; }
  const std::vector<double>& lags() const { return lags_; }
  double horizon() const { return epochs_.back(); }  // T_m
  double mean_lag() const { return epochs_.back() / static_cast<double>(size()); }
  bool equal_spacing() const { return equal_spacing_; }

  double spacing() const {
    if (!equal_spacing_)
      throw validation_error("grid is not equally spaced");
    return lags_.front();
  }

  // True when the lag sequences agree element-wise to relative tolerance.
  bool same_pattern(const MeasurementGrid& other, double rel_tol = 1e-9) const {
    if (size() != other.size()) return false;
    for (std::size_t j = 0; j < lags_.size(); ++j) {
      const double scale = std::max(lags_[j], other.lags_[j]);
      if (std::fabs(lags_[j] - other.lags_[j]) > rel_tol * scale) return false;
    }
    return true;
  }

 private:
  std::vector<double> epochs_;
  std::vector<double> lags_;
  bool equal_spacing_ = false;
};

// Failure threshold on the performance characteristic scale.
struct Threshold {
  double value;
  explicit Threshold(double c) : value(c) {
    if (!std::isfinite(c) || c <= 0.0)
      throw validation_error("threshold must be positive and finite");
  }
};

// Rectangular panel of degradation increments y_ij > 0 for n units on a
// common grid, plus the cumulative paths Y_ij. Immutable after construction.
class DegradationDataset {
 public:
  DegradationDataset(MeasurementGrid grid, std::vector<std::vector<double>> increments,
                     std::vector<std::string> unit_ids = {})
      : grid_(std::move(grid)),
        increments_(std::move(increments)),
        unit_ids_(std::move(unit_ids)) {
    if (increments_.empty())
      throw validation_error("dataset needs at least one unit");
    if (unit_ids_.empty()) {
      unit_ids_.reserve(increments_.size());
      for (std::size_t i = 0; i < increments_.size(); ++i)
        unit_ids_.push_back(std::to_string(i + 1));
    }
    if (unit_ids_.size() != increments_.size())
      throw shape_error("unit id count does not match unit count");
    const std::size_t m = grid_.size();
    cumulative_.resize(increments_.size());
    for (std::size_t i = 0; i < increments_.size(); ++i) {
      if (increments_[i].size() != m)
        throw shape_error("unit " + unit_ids_[i] + ": expected " + std::to_string(m) +
                          " increments, got " + std::to_string(increments_[i].size()));
      cumulative_[i].resize(m);
      double running = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double y = increments_[i][j];
        if (!std::isfinite(y) || y <= 0.0)
          throw validation_error("unit " + unit_ids_[i] + ", epoch " + std::to_string(j + 1) +
                                 ": increments must be strictly positive");
        running += y;
        cumulative_[i][j] = running;
      }
    }
  }

  std::size_t units() const { return increments_.size(); }  // n
  const MeasurementGrid& grid() const { return grid_; }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<std::vector<double>>& increments() const { return increments_; }

  double increment(std::size_t i, std::size_t j) const { return increments_[i][j]; }
  double cumulative(std::size_t i, std::size_t j) const { return cumulative_[i][j]; }
  std::span<const double> path(std::size_t i) const { return cumulative_[i]; }

  // Epoch-j increments across all units, in unit order.
  std::vector<double> epoch_increments(std::size_t j) const {
    std::vector<double> out(units());
    for (std::size_t i = 0; i < units(); ++i) out[i] = increments_[i][j];
    return out;
  }

  // Restriction to the first m_keep epochs.
  DegradationDataset head(std::size_t m_keep) const {
    if (m_keep == 0 || m_keep > grid_.size())
      throw shape_error("head: epoch count out of range");
    std::vector<double> epochs(grid_.epochs().begin(), grid_.epochs().begin() + m_keep);
    std::vector<std::vector<double>> inc(units());
    for (std::size_t i = 0; i < units(); ++i)
      inc[i].assign(increments_[i].begin(), increments_[i].begin() + m_keep);
    return DegradationDataset(MeasurementGrid(std::move(epochs)), std::move(inc), unit_ids_);
  }

 private:
  MeasurementGrid grid_;
  std::vector<std::vector<double>> increments_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<std::string> unit_ids_;
};

/// Difference cumulative paths into a dataset; rejects non-monotone paths.
inline DegradationDataset increments_from_paths(const std::vector<std::vector<double>>& paths,
                                                MeasurementGrid grid,
                                                std::vector<std::string> unit_ids = {}) {
  if (paths.empty()) throw validation_error("no degradation paths supplied");
  const std::size_t m = grid.size();
  std::vector<std::vector<double>> increments(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].size() != m)
      throw shape_error("unit " + std::to_string(i + 1) + ": path length " +
                        std::to_string(paths[i].size()) + " does not match grid size " +
                        std::to_string(m));
    increments[i].resize(m);
    double prev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double y = paths[i][j] - prev;
      if (!std::isfinite(y) || y <= 0.0)
        throw validation_error("unit " + std::to_string(i + 1) + ", epoch " +
                               std::to_string(j + 1) +
                               ": cumulative path must be strictly increasing");
      increments[i][j] = y;
      prev = paths[i][j];
    }
  }
  return DegradationDataset(std::move(grid), std::move(increments), std::move(unit_ids));
}

// Statistics consumed by the conjugate updates. Geometric means are carried
// in log space; the exponentiated values are provided for convenience.
struct SufficientStats {
  double ybar_a = 0.0;              // arithmetic mean of all increments
  double log_weighted_gmean = 0.0;  // ln prod_ij y_ij^(t_j / (n m Tbar_m))
  double weighted_gmean = 0.0;
  double log_pooled_gmean = 0.0;  // ln [prod_ij y_ij]^(1/(m n))
  double pooled_gmean = 0.0;
  std::vector<double> per_unit_means;  // ybar_i
};

inline SufficientStats sufficient_stats(const DegradationDataset& data) {
  SufficientStats s;
  const std::size_t n = data.units();
  const std::size_t m = data.grid().size();
  const auto& lags = data.grid().lags();
  const double horizon = data.grid().horizon();

  s.per_unit_means.resize(n);
  double total = 0.0;
  double log_sum = 0.0;        // sum of ln y_ij
  double log_weighted = 0.0;   // sum_j (t_j / (n T_m)) sum_i ln y_ij
  for (std::size_t j = 0; j < m; ++j) {
    double col_log = 0.0;
    for (std::size_t i = 0; i < n; ++i) col_log += std::log(data.increment(i, j));
    log_sum += col_log;
    log_weighted += lags[j] / (static_cast<double>(n) * horizon) * col_log;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) row += data.increment(i, j);
    s.per_unit_means[i] = row / static_cast<double>(m);
    total += row;
  }
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  s.ybar_a = total / mn;
  s.log_weighted_gmean = log_weighted;
  s.weighted_gmean = std::exp(log_weighted);
  s.log_pooled_gmean = log_sum / mn;
  s.pooled_gmean = std::exp(s.log_pooled_gmean);
  return s;
}

}  // namespace gammarul
