// Regenerates the bundled synthetic fixtures. The laser-style fleet is
// calibrated to the published GaAs laser analysis (15 units, 250-hour
// spacing, 16 epochs, threshold 10, alpha = 0.031, beta = 15.35); the
// wheel-style fleet is heterogeneous (11 units, 50 kkm spacing, 12 epochs,
// threshold 60, shared alpha = 6, unit scales chosen so three units fail
// before the last epoch). Seeds are fixed so the committed files are
// reproducible byte for byte.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gammarul/rng.hpp"

namespace {

void write_fixture(const std::string& path, const std::vector<double>& epochs,
                   const std::vector<std::vector<double>>& cumulative) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << path << ": cannot open for writing\n";
    std::exit(1);
  }
  out << "unit_id,time,value\n";
  char buf[64];
  for (std::size_t i = 0; i < cumulative.size(); ++i)
    for (std::size_t j = 0; j < epochs.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%zu,%g,%.3f", i + 1, epochs[j], cumulative[i][j]);
      out << buf << '\n';
    }
  std::cout << "wrote " << path << '\n';
}

std::vector<std::vector<double>> simulate_paths(double alpha, const std::vector<double>& betas,
                                                std::size_t m, double lag,
                                                gammarul::RngStream& rng) {
  std::vector<std::vector<double>> paths(betas.size(), std::vector<double>(m));
  for (std::size_t i = 0; i < betas.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      acc += gammarul::sample_gamma(alpha * lag, betas[i], rng);
      paths[i][j] = acc;
    }
  }
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the bundled synthetic degradation fixtures"};
  std::string out_dir = "data";
  std::uint64_t laser_seed = 165;
  std::uint64_t wheel_seed = 85;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--laser-seed", laser_seed, "seed for the laser-style fixture");
  app.add_option("--wheel-seed", wheel_seed, "seed for the wheel-style fixture");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);

  {
    const std::size_t n = 15, m = 16;
    const double lag = 250.0;
    std::vector<double> epochs(m);
    for (std::size_t j = 0; j < m; ++j) epochs[j] = lag * static_cast<double>(j + 1);
    gammarul::RngStream rng(laser_seed, 0);
    const std::vector<double> betas(n, 15.35);
    write_fixture(out_dir + "/laser.csv", epochs, simulate_paths(0.031, betas, m, lag, rng));
  }

  {
    const std::size_t m = 12;
    const double lag = 50.0;
    std::vector<double> epochs(m);
    for (std::size_t j = 0; j < m; ++j) epochs[j] = lag * static_cast<double>(j + 1);
    gammarul::RngStream rng(wheel_seed, 0);
    // units 5, 9 and 11 are expected to cross the threshold before 600 kkm
    const std::vector<double> betas = {64.0, 66.0, 68.0, 70.0, 52.0, 73.0,
                                       76.0, 80.0, 55.0, 85.0, 57.0};
    write_fixture(out_dir + "/wheel.csv", epochs, simulate_paths(6.0, betas, m, lag, rng));
  }
  return 0;
}
