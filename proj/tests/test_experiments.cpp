#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "otfpf/experiments.hpp"
#include "support.hpp"

using namespace otfpf;

namespace {

ExperimentConfig diffusion_config(FilterKind kind) {
  Eigen::MatrixXd a(1, 1), c(1, 1);
  a << 0.0;
  c << 0.0;
  Eigen::VectorXd mean(1);
  mean << 0.0;
  ExperimentConfig cfg{LinearGaussianModel(a, c),
                       GaussianBelief(mean, SpdMatrix::identity(1))};
  cfg.kind = kind;
  return cfg;
}

ExperimentConfig observable_config(FilterKind kind) {
  Eigen::MatrixXd a(1, 1), c(1, 1);
  a << 0.0;
  c << 1.0;
  Eigen::VectorXd mean(1);
  mean << 0.0;
  ExperimentConfig cfg{LinearGaussianModel(a, c),
                       GaussianBelief(mean, SpdMatrix::identity(1))};
  cfg.kind = kind;
  return cfg;
}

}  // namespace

TEST_CASE("analytic_reference matches the closed forms") {
  const auto mc0 = analytic_reference(FilterKind::monte_carlo, 0.0, 80);
  CHECK(mc0.first == Catch::Approx(1.0 / 80));
  CHECK(mc0.second == Catch::Approx(3.0 / 80));

  const auto mc1 = analytic_reference(FilterKind::monte_carlo, 1.0, 80);
  CHECK(mc1.first == Catch::Approx(2.0 / 80));
  CHECK(mc1.second == Catch::Approx(12.0 / 80));

  const auto ot = analytic_reference(FilterKind::ot_fpf, 5.0, 80);
  CHECK(ot.first == Catch::Approx(1.0 / 80));
  CHECK(ot.second == Catch::Approx(3.0 / 80));

  CHECK_THROWS_AS(analytic_reference(FilterKind::fpf, 0.0, 80),
                  unsupported_reference_error);
}

TEST_CASE("mean_and_variance is a plain sample estimator") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto [mean, var] = mean_and_variance(v);
  CHECK(mean == Catch::Approx(2.5));
  CHECK(var == Catch::Approx(5.0 / 3.0));  // divisor R - 1
}

TEST_CASE("aggregation depends only on the multiset of replication values") {
  auto rng = make_rng(3, "agg");
  std::vector<double> values(501);
  for (auto& v : values) v = standard_normal_vector(rng, 1)(0);
  const auto base = mean_and_variance(values);
  std::shuffle(values.begin(), values.end(), rng);
  const auto shuffled = mean_and_variance(values);
  CHECK(std::abs(base.first - shuffled.first) <= 1e-12);
  CHECK(std::abs(base.second - shuffled.second) <= 1e-12 * base.second);
}

TEST_CASE("run_variance_study works at the minimum replication count") {
  ExperimentConfig cfg = diffusion_config(FilterKind::monte_carlo);
  cfg.particles = 10;
  cfg.replications = 2;
  cfg.t_max = 0.05;
  cfg.dt = 0.01;
  const ExperimentReport report = run_variance_study(cfg);
  REQUIRE(report.times.size() == 6);
  const auto& s = report.find(FilterKind::monte_carlo, "mean[0]");
  for (const double v : s.sim_var) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("run_variance_study rejects invalid configs") {
  ExperimentConfig cfg = diffusion_config(FilterKind::monte_carlo);
  cfg.particles = 1;
  CHECK_THROWS_AS(run_variance_study(cfg), config_error);
  cfg.particles = 10;
  cfg.replications = 1;
  CHECK_THROWS_AS(run_variance_study(cfg), config_error);
}

TEST_CASE("Monte-Carlo mean estimator is unbiased across replications") {
  ExperimentConfig cfg = diffusion_config(FilterKind::monte_carlo);
  cfg.particles = 50;
  cfg.replications = 200;
  cfg.t_max = 0.5;
  cfg.dt = 0.01;
  cfg.seed = 4;
  const ExperimentReport report = run_variance_study(cfg);
  const auto& s = report.find(FilterKind::monte_carlo, "mean[0]");
  for (std::size_t t = 0; t < report.times.size(); ++t) {
    const double bound =
        4.0 * std::sqrt(s.sim_var[t] / static_cast<double>(cfg.replications));
    CHECK(std::abs(s.rep_mean[t]) <= bound);
  }
}

TEST_CASE("reference curves are attached exactly where they exist") {
  ExperimentConfig cfg = diffusion_config(FilterKind::monte_carlo);
  cfg.particles = 20;
  cfg.replications = 5;
  cfg.t_max = 0.05;
  cfg.dt = 0.01;
  const ExperimentReport mc = run_variance_study(cfg);
  const auto& mean_series = mc.find(FilterKind::monte_carlo, "mean[0]");
  const auto& cov_series = mc.find(FilterKind::monte_carlo, "cov[0][0]");
  for (std::size_t t = 0; t < mc.times.size(); ++t) {
    CHECK(mean_series.ref_var[t] ==
          Catch::Approx((1.0 + mc.times[t]) / static_cast<double>(cfg.particles)));
    CHECK(cov_series.ref_var[t] ==
          Catch::Approx(3.0 * std::pow(1.0 + mc.times[t], 2) /
                        static_cast<double>(cfg.particles)));
  }

  cfg.kind = FilterKind::fpf;  // no closed form for the stochastic filter
  const ExperimentReport fpf = run_variance_study(cfg);
  for (const double v : fpf.find(FilterKind::fpf, "mean[0]").ref_var)
    CHECK(std::isnan(v));

  ExperimentConfig obs_cfg = observable_config(FilterKind::monte_carlo);
  obs_cfg.particles = 20;
  obs_cfg.replications = 5;
  obs_cfg.t_max = 0.05;
  obs_cfg.dt = 0.01;
  const ExperimentReport obs = run_variance_study(obs_cfg);
  for (const double v : obs.find(FilterKind::monte_carlo, "mean[0]").ref_var)
    CHECK(std::isnan(v));  // not the pure-diffusion setup
}

TEST_CASE("optimal transport keeps the simulation variance of the mean flat") {
  ExperimentConfig cfg = diffusion_config(FilterKind::ot_fpf);
  cfg.particles = 50;
  cfg.replications = 50;
  cfg.t_max = 5.0;
  cfg.dt = 0.01;
  cfg.seed = 6;
  const ExperimentReport report = run_variance_study(cfg);
  const auto& s = report.find(FilterKind::ot_fpf, "mean[0]");
  const double at_zero = s.sim_var.front();
  for (const double v : s.sim_var)
    CHECK(std::abs(v - at_zero) <= 1e-8 * at_zero);
}

TEST_CASE("comparison study: both filters reach the oracle on the shared path") {
  ExperimentConfig cfg = observable_config(FilterKind::fpf);
  cfg.particles = 2000;
  cfg.replications = 10;
  cfg.t_max = 0.5;
  cfg.dt = 5e-3;
  cfg.seed = 44;

  const ObservationPath obs =
      simulate_truth_and_observations(cfg.model, cfg.init, cfg.t_max, cfg.dt,
                                      seeds::stream(cfg.seed, "shared-path"))
          .observations;
  const GaussianBelief oracle = run_kalman_bucy(cfg.model, cfg.init, obs).back();
  REQUIRE(std::abs(oracle.mean(0)) > 0.3);  // keeps the relative check meaningful

  const ExperimentReport report = run_filtering_comparison(cfg);
  const double tol =
      3.0 * (1.0 / std::sqrt(static_cast<double>(cfg.particles)) + cfg.dt);
  for (const FilterKind kind : {FilterKind::fpf, FilterKind::ot_fpf}) {
    const auto& mean_series = report.find(kind, "mean[0]");
    const auto& cov_series = report.find(kind, "cov[0][0]");
    CHECK(std::abs(mean_series.rep_mean.back() - oracle.mean(0)) /
              std::abs(oracle.mean(0)) <=
          tol);
    CHECK(std::abs(cov_series.rep_mean.back() - oracle.cov.matrix()(0, 0)) /
              oracle.cov.matrix()(0, 0) <=
          tol);
    for (const double v : mean_series.ref_var) CHECK(std::isnan(v));
    for (const double v : mean_series.sim_var) CHECK(std::isfinite(v));
  }

  // the stochastic filter has strictly positive simulation variance at t > 0
  CHECK(report.find(FilterKind::fpf, "mean[0]").sim_var.back() > 0.0);
}
