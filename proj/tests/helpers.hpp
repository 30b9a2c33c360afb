#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gammarul/data.hpp"
#include "gammarul/rng.hpp"

namespace testutil {

// Fleet shaped like the GaAs laser experiment: 15 units, 16 epochs every
// 250 hours, truth alpha = 0.031, beta = 15.35, threshold 10.
inline gammarul::DegradationDataset laser_like_fleet(std::uint64_t seed = 2026) {
  gammarul::RngStream rng(seed, 0);
  const std::size_t n = 15, m = 16;
  const double lag = 250.0;
  std::vector<std::vector<double>> inc(n, std::vector<double>(m));
  for (auto& row : inc)
    for (auto& y : row) y = gammarul::sample_gamma(0.031 * lag, 15.35, rng);
  return gammarul::DegradationDataset(gammarul::MeasurementGrid::equally_spaced(m, lag),
                                      std::move(inc));
}

inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace testutil
