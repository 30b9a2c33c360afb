#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gammarul/data.hpp"
#include "gammarul/errors.hpp"
#include "gammarul/online.hpp"
#include "gammarul/samplers.hpp"
#include "gammarul/simstudy.hpp"

// CSV surfaces: the long-form ingestion format (unit_id,time,value with
// cumulative degradation values) and the table writers for draws,
// trajectories and metrics.

namespace gammarul {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw validation_error(where + ": malformed numeric field '" + field + "'");
  return value;
}

}  // namespace detail

/// Read the long-form degradation CSV: header `unit_id,time,value`, one
/// cumulative measurement per row, identical time grids across units.
inline DegradationDataset read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error(path + ": cannot open file");

  std::string line;
  std::size_t line_no = 0;
  // header
  for (;;) {
    if (!std::getline(in, line))
      throw validation_error(path + ": empty file");
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  {
    auto fields = detail::split_csv_line(line);
    for (auto& f : fields)
      std::transform(f.begin(), f.end(), f.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (fields.size() != 3 || fields[0] != "unit_id" || fields[1] != "time" ||
        fields[2] != "value")
      throw validation_error(path + ":" + std::to_string(line_no) +
                             ": expected header 'unit_id,time,value'");
  }

  std::vector<std::string> order;                       // first-appearance order
  std::map<std::string, std::vector<std::pair<double, double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 3)
      throw validation_error(where + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
    const std::string& unit = fields[0];
    if (unit.empty()) throw validation_error(where + ": empty unit id");
    const double t = detail::parse_double(fields[1], where);
    const double v = detail::parse_double(fields[2], where);
    auto [it, inserted] = rows.try_emplace(unit);
    if (inserted) order.push_back(unit);
    it->second.emplace_back(t, v);
  }
  if (order.empty()) throw validation_error(path + ": no data rows");

  for (auto& [unit, series] : rows)
    std::stable_sort(series.begin(), series.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

  const auto& ref = rows.at(order.front());
  std::vector<double> epochs(ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) epochs[j] = ref[j].first;

  std::vector<std::vector<double>> paths;
  paths.reserve(order.size());
  for (const auto& unit : order) {
    const auto& series = rows.at(unit);
    if (series.size() != epochs.size())
      throw shape_error(path + ": unit '" + unit + "' has " +
                        std::to_string(series.size()) + " measurements, expected " +
                        std::to_string(epochs.size()));
    std::vector<double> p(series.size());
    for (std::size_t j = 0; j < series.size(); ++j) {
      const double scale = std::max(std::fabs(epochs[j]), std::fabs(series[j].first));
      if (std::fabs(series[j].first - epochs[j]) > 1e-12 * std::max(scale, 1.0))
        throw shape_error(path + ": unit '" + unit +
                          "' measured at different epochs than unit '" + order.front() +
                          "'");
      p[j] = series[j].second;
    }
    paths.push_back(std::move(p));
  }
  return increments_from_paths(paths, MeasurementGrid(std::move(epochs)), order);
}

inline void write_long_csv(std::ostream& out, const DegradationDataset& data) {
  out << "unit_id,time,value\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.units(); ++i)
    for (std::size_t j = 0; j < data.grid().size(); ++j)
      out << data.unit_ids()[i] << ',' << data.grid().epochs()[j] << ','
          << data.cumulative(i, j) << '\n';
}

inline void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
  out << "draw_index,alpha";
  for (std::size_t i = 0; i < draws.n_units; ++i) out << ",beta_" << (i + 1);
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    out << (k + 1) << ',' << draws.alpha[k];
    for (std::size_t i = 0; i < draws.n_units; ++i) out << ',' << draws.beta(k, i);
    out << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& out, const ReplayResult& result) {
  out << "epoch,unit_id,point,lower,upper,true_rul\n";
  out << std::setprecision(12);
  for (const auto& pt : result.trajectory) {
    out << pt.epoch << ',' << pt.unit_id << ',' << pt.point << ',' << pt.lower << ','
        << pt.upper << ',';
    if (pt.true_rul) out << *pt.true_rul;
    out << '\n';
  }
}

inline void write_params_csv(std::ostream& out, const ReplayResult& result) {
  out << "epoch,alpha_hat";
  for (const auto& id : result.unit_ids) out << ",beta_hat_" << id;
  out << '\n';
  out << std::setprecision(12);
  for (const auto& track : result.params) {
    out << track.epoch << ',' << track.alpha_hat;
    for (double b : track.beta_hats) out << ',' << b;
    out << '\n';
  }
}

inline void write_failures_csv(std::ostream& out, const ReplayResult& result) {
  out << "unit_id,epoch_index,failure_time\n";
  out << std::setprecision(12);
  for (const auto& f : result.failures)
    out << f.unit_id << ',' << f.epoch_index << ',' << f.time << '\n';
}

inline void write_metrics_csv(std::ostream& out, const MetricsTable& table) {
  out << "sampler,delta,parameter,truth,rb,rmse,mean_length,fcp,replications_used\n";
  out << std::setprecision(10);
  for (const auto& r : table.rows)
    out << r.sampler << ',' << r.delta << ',' << r.parameter << ',' << r.truth << ','
        << r.rb << ',' << r.rmse << ',' << r.mean_length << ',' << r.fcp << ','
        << r.replications_used << '\n';
}

}  // namespace gammarul
