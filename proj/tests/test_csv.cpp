#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gammarul/csv.hpp"

using namespace gammarul;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("gammarul_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::error_code ec; std::filesystem::remove(path, ec); }
};

}  // namespace

TEST_CASE("long-form csv round trip", "[csv]") {
  TempFile f(
      "unit_id,time,value\n"
      "a,250,0.5\n"
      "a,500,1.1\n"
      "b,250,0.4\n"
      "b,500,0.9\n");
  const auto d = read_long_csv(f.path.string());
  REQUIRE(d.units() == 2);
  REQUIRE(d.grid().size() == 2);
  CHECK(d.unit_ids()[0] == "a");
  CHECK(d.increment(0, 0) == Catch::Approx(0.5));
  CHECK(d.increment(0, 1) == Catch::Approx(0.6));
  CHECK(d.increment(1, 1) == Catch::Approx(0.5));

  std::ostringstream out;
  write_long_csv(out, d);
  TempFile g(out.str());
  const auto d2 = read_long_csv(g.path.string());
  CHECK(d2.increments() == d.increments());
  CHECK(d2.unit_ids() == d.unit_ids());
}

TEST_CASE("csv rows arriving out of time order are sorted per unit", "[csv]") {
  TempFile f(
      "unit_id,time,value\n"
      "u,500,1.1\n"
      "u,250,0.5\n");
  const auto d = read_long_csv(f.path.string());
  CHECK(d.increment(0, 0) == Catch::Approx(0.5));
  CHECK(d.increment(0, 1) == Catch::Approx(0.6));
}

TEST_CASE("csv header and row validation name the offending line", "[csv]") {
  TempFile bad_header("unit,when,what\nu,1,2\n");
  CHECK_THROWS_AS(read_long_csv(bad_header.path.string()), validation_error);

  TempFile bad_row(
      "unit_id,time,value\n"
      "u,250,0.5\n"
      "u,500,oops\n");
  try {
    read_long_csv(bad_row.path.string());
    FAIL("expected a validation error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  TempFile short_row(
      "unit_id,time,value\n"
      "u,250\n");
  CHECK_THROWS_AS(read_long_csv(short_row.path.string()), validation_error);

  CHECK_THROWS_AS(read_long_csv("/nonexistent/file.csv"), validation_error);
  TempFile empty("");
  CHECK_THROWS_AS(read_long_csv(empty.path.string()), validation_error);
}

TEST_CASE("csv units must share the measurement grid", "[csv]") {
  TempFile f(
      "unit_id,time,value\n"
      "a,250,0.5\n"
      "a,500,1.1\n"
      "b,250,0.4\n");
  CHECK_THROWS_AS(read_long_csv(f.path.string()), shape_error);

  TempFile g(
      "unit_id,time,value\n"
      "a,250,0.5\n"
      "a,500,1.1\n"
      "b,300,0.4\n"
      "b,500,0.9\n");
  CHECK_THROWS_AS(read_long_csv(g.path.string()), shape_error);
}

TEST_CASE("csv rejects non-monotone cumulative values", "[csv]") {
  TempFile f(
      "unit_id,time,value\n"
      "a,250,0.5\n"
      "a,500,0.5\n");
  CHECK_THROWS_AS(read_long_csv(f.path.string()), validation_error);
}

TEST_CASE("draws csv layout", "[csv]") {
  PosteriorDraws d;
  d.n_units = 2;
  d.alpha = {0.1, 0.2};
  d.betas = {1.0, 2.0, 3.0, 4.0};
  std::ostringstream out;
  write_draws_csv(out, d);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "draw_index,alpha,beta_1,beta_2");
  std::getline(in, line);
  CHECK(line.rfind("1,0.1", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("2,0.2", 0) == 0);
}

TEST_CASE("metrics csv layout", "[csv]") {
  MetricsTable t;
  t.rows.push_back(MetricsRow{"dgs", 0.0, "alpha", 0.031, 0.02, 0.003, 0.011, 0.94, 500});
  std::ostringstream out;
  write_metrics_csv(out, t);
  CHECK(out.str().find("sampler,delta,parameter,truth,rb,rmse,mean_length,fcp,"
                       "replications_used") == 0);
  CHECK(out.str().find("dgs,0,alpha,0.031,0.02,0.003,0.011,0.94,500") != std::string::npos);
}
