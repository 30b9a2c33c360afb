#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "gammarul/conjugate.hpp"
#include "gammarul/lifetime.hpp"
#include "gammarul/marginal.hpp"
#include "gammarul/samplers.hpp"
#include "helpers.hpp"

using namespace gammarul;

namespace {

struct LaserFit {
  AggParams post;
  MarginalAlphaDensity marginal;
  BetaConditional cond;
};

LaserFit laser_fit() {
  const auto data = testutil::laser_like_fleet();
  AggParams post = posterior_update_agg(auto_hyperparams(data, 1.0), data);
  MarginalAlphaDensity m = make_alpha_marginal(post);
  BetaConditional c = make_beta_conditional(post);
  return LaserFit{std::move(post), std::move(m), std::move(c)};
}

}  // namespace

TEST_CASE("data-driven hyperparameters reproduce themselves in the posterior",
          "[samplers]") {
  const auto data = testutil::laser_like_fleet();
  const auto s = sufficient_stats(data);
  const AggParams post = posterior_update_agg(auto_hyperparams(data, 1.0), data);
  CHECK(post.delta() == Catch::Approx(241.0));  // 15 * 16 + 1
  CHECK(post.log_omega() == Catch::Approx(s.log_weighted_gmean).epsilon(1e-12));
  CHECK(post.lambda() == Catch::Approx(s.ybar_a).epsilon(1e-12));
}

TEST_CASE("sampler config validation", "[samplers]") {
  SamplerConfig cfg;
  cfg.draws = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = SamplerConfig{};
  cfg.pool = 50;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = SamplerConfig{};
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = SamplerConfig{};
  cfg.credible_level = 1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("grid sampler on the laser-scale posterior", "[samplers]") {
  const LaserFit f = laser_fit();
  SamplerConfig cfg;
  cfg.draws = 2000;
  RngStream rng(1001, 0);
  const PosteriorDraws d = dgs_sample(f.marginal, f.cond, cfg, rng);

  REQUIRE(d.size() == 2000);
  CHECK(d.sampler_tag == "dgs");
  CHECK(d.n_units == 1);
  for (double a : d.alpha) CHECK(a > 0.0);
  for (double b : d.betas) CHECK(b > 0.0);

  const Estimate ea = summarize(d, functional_alpha(), 0.05);
  const Estimate eb = summarize(d, functional_beta(), 0.05);
  CHECK(ea.point > 0.024);
  CHECK(ea.point < 0.038);
  CHECK(eb.point > 12.0);
  CHECK(eb.point < 19.0);
  CHECK(ea.lower < ea.point);
  CHECK(ea.point < ea.upper);

  CHECK(d.diagnostics.support_points >= 10);
  CHECK_FALSE(d.diagnostics.resolution_warning);
  CHECK(d.diagnostics.tail_mass_bound < 1e-6);
}

TEST_CASE("grid sampler clamps the interval at zero", "[samplers]") {
  // wide-sigma target: mode 0.2, sigma ~ 0.45, so mode - 6 sigma < 0
  MarginalAlphaDensity t;
  const double a = 1.2, b = 1.0;
  t.log_density = [=](double x) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) - b * x;
  };
  t.dlog = [=](double x) { return (a - 1.0) / x - b; };
  t.d2log = [=](double x) { return -(a - 1.0) / (x * x); };
  t.tail_rate = b;
  BetaConditional cond{0.0, 1.0, {1.0}};
  SamplerConfig cfg;
  cfg.draws = 200;
  cfg.pool = 1000;
  RngStream rng(1002, 0);
  const PosteriorDraws d = dgs_sample(t, cond, cfg, rng);
  for (double x : d.alpha) CHECK(x > 0.0);
}

TEST_CASE("importance resampler tuning matches the Laplace fit", "[samplers]") {
  const LaserFit f = laser_fit();
  const LaplaceFit lf = laplace_fit(f.marginal);
  SamplerConfig cfg;
  cfg.draws = 2000;
  RngStream rng(1003, 0);
  const PosteriorDraws d = sir_sample(f.marginal, f.cond, cfg, rng);

  const double a = d.diagnostics.instrumental_shape;
  const double b = d.diagnostics.instrumental_rate;
  CHECK(a / b == Catch::Approx(lf.mode).epsilon(1e-12));
  CHECK(a / (b * b) == Catch::Approx(1.0 / lf.curvature).epsilon(1e-12));

  CHECK(d.diagnostics.effective_sample_size > 0.5 * static_cast<double>(cfg.pool));
  CHECK_FALSE(d.diagnostics.degeneracy_warning);

  // resampled mean agrees with the weighted pool mean within MC error
  const Estimate ea = summarize(d, functional_alpha(), 0.05);
  const double sd = (ea.upper - ea.lower) / 3.92;
  CHECK(std::fabs(ea.point - d.diagnostics.pool_weighted_mean) <=
        3.0 * sd / std::sqrt(static_cast<double>(d.size())) + 1e-12);
}

TEST_CASE("all three samplers target the same posterior", "[samplers]") {
  const LaserFit f = laser_fit();
  SamplerConfig cfg;
  cfg.draws = 10000;
  cfg.burn_in = 2000;
  cfg.thin = 3;
  RngStream r1(1004, 1), r2(1004, 2), r3(1004, 3);
  const PosteriorDraws dgs = dgs_sample(f.marginal, f.cond, cfg, r1);
  const PosteriorDraws sir = sir_sample(f.marginal, f.cond, cfg, r2);
  const PosteriorDraws gs = gibbs_sample(f.post, cfg, r3);

  const auto rho = 0.05;
  const double a_dgs = summarize(dgs, functional_alpha(), rho).point;
  const double a_sir = summarize(sir, functional_alpha(), rho).point;
  const double a_gs = summarize(gs, functional_alpha(), rho).point;
  const double b_dgs = summarize(dgs, functional_beta(), rho).point;
  const double b_sir = summarize(sir, functional_beta(), rho).point;
  const double b_gs = summarize(gs, functional_beta(), rho).point;

  CHECK(std::fabs(a_dgs - a_sir) / a_dgs < 0.02);
  CHECK(std::fabs(a_dgs - a_gs) / a_dgs < 0.02);
  CHECK(std::fabs(b_dgs - b_sir) / b_dgs < 0.02);
  CHECK(std::fabs(b_dgs - b_gs) / b_dgs < 0.02);
}

TEST_CASE("gibbs boundary configuration returns exactly one draw", "[samplers]") {
  const LaserFit f = laser_fit();
  SamplerConfig cfg;
  cfg.draws = 1;
  cfg.burn_in = 0;
  cfg.thin = 1;
  RngStream rng(1005, 0);
  const PosteriorDraws d = gibbs_sample(f.post, cfg, rng);
  REQUIRE(d.size() == 1);
  CHECK(d.alpha[0] > 0.0);
  CHECK(d.betas[0] > 0.0);
}

TEST_CASE("gibbs chains from dispersed starts agree", "[samplers]") {
  const LaserFit f = laser_fit();
  const double mode = laplace_fit(f.marginal).mode;
  SamplerConfig cfg;
  cfg.draws = 1500;
  cfg.burn_in = 1000;
  cfg.thin = 2;
  RngStream r1(1006, 1), r2(1006, 2);
  const PosteriorDraws low = gibbs_sample(f.post, cfg, r1, mode / 3.0);
  const PosteriorDraws high = gibbs_sample(f.post, cfg, r2, mode * 3.0);
  const double a_low = summarize(low, functional_alpha(), 0.05).point;
  const double a_high = summarize(high, functional_alpha(), 0.05).point;
  CHECK(std::fabs(a_low - a_high) / a_low < 0.03);
}

TEST_CASE("samplers replay identically on a fixed stream", "[samplers]") {
  const LaserFit f = laser_fit();
  SamplerConfig cfg;
  cfg.draws = 300;
  RngStream r1(1007, 9), r2(1007, 9);
  const PosteriorDraws d1 = dgs_sample(f.marginal, f.cond, cfg, r1);
  const PosteriorDraws d2 = dgs_sample(f.marginal, f.cond, cfg, r2);
  CHECK(d1.alpha == d2.alpha);
  CHECK(d1.betas == d2.betas);
}

TEST_CASE("summarize on degenerate and small inputs", "[samplers]") {
  PosteriorDraws d;
  d.n_units = 1;
  d.alpha.assign(30, 0.5);
  d.betas.assign(30, 2.0);

  const Estimate c =
      summarize(d, [](double, std::span<const double>) { return 7.25; }, 0.05);
  CHECK(c.point == Catch::Approx(7.25));
  CHECK(c.lower == Catch::Approx(7.25));
  CHECK(c.upper == Catch::Approx(7.25));

  PosteriorDraws tiny;
  tiny.n_units = 1;
  tiny.alpha.assign(5, 0.5);
  tiny.betas.assign(5, 2.0);
  CHECK_THROWS_AS(summarize(tiny, functional_alpha(), 0.05), config_error);
  CHECK_THROWS_AS(summarize(d, functional_alpha(), 1.5), config_error);
}

TEST_CASE("posterior mean of the lifetime functional lands near the truth",
          "[samplers]") {
  // truth alpha = 0.031, beta = 15.35, threshold 10: MTTF = 4967.74
  const LaserFit f = laser_fit();
  SamplerConfig cfg;
  cfg.draws = 4000;
  RngStream rng(1008, 0);
  const PosteriorDraws d = dgs_sample(f.marginal, f.cond, cfg, rng);
  const Estimate e = summarize(d, functional_mttf(10.0), 0.05);
  CHECK(std::fabs(e.point - 4967.742) / 4967.742 < 0.10);
}

TEST_CASE("improper posterior is rejected by the samplers", "[samplers]") {
  MeasurementGrid g = MeasurementGrid::equally_spaced(4, 1.0);
  const AggParams improper(0.0, 0.5, 1.5, g);
  SamplerConfig cfg;
  RngStream rng(1009, 0);
  CHECK_THROWS_AS(gibbs_sample(improper, cfg, rng), properness_error);
}
