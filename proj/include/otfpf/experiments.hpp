#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/ensemble.hpp"
#include "otfpf/errors.hpp"
#include "otfpf/model.hpp"
#include "otfpf/rng.hpp"

namespace otfpf {

/// Parameters of a replicated-run study.
struct ExperimentConfig {
  LinearGaussianModel model;
  GaussianBelief init;
  FilterKind kind = FilterKind::monte_carlo;
  Eigen::Index particles = 80;      // N
  Eigen::Index replications = 500;  // R
  double t_max = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (particles < 2) throw config_error("config: N must be at least 2");
    if (replications < 2) throw config_error("config: R must be at least 2");
    step_count(t_max, dt);  // validates dt > 0 and t_max >= dt
    if (init.dim() != model.state_dim())
      throw config_error("config: init dimension does not match the model");
  }
};

constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();

/// Cross-replication statistics of one scalar estimator component over time.
/// ref_var entries are NaN where no analytic reference applies.
struct EstimatorSeries {
  FilterKind kind;
  std::string estimator;  // "mean[i]" or "cov[i][j]"
  std::vector<double> rep_mean;
  std::vector<double> sim_var;
  std::vector<double> ref_var;
};

struct ExperimentReport {
  std::vector<double> times;
  std::vector<EstimatorSeries> series;

  const EstimatorSeries& find(FilterKind kind, std::string_view estimator) const {
    for (const auto& s : series)
      if (s.kind == kind && s.estimator == estimator) return s;
    throw invalid_input_error("report: no series " + std::string(estimator) + " for " +
                              std::string(to_string(kind)));
  }
};

/// Scalar component labels for a d-dimensional state: means first, then the
/// upper triangle of the covariance in row-major order.
inline std::vector<std::string> estimator_labels(Eigen::Index dim) {
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < dim; ++i) labels.push_back("mean[" + std::to_string(i) + "]");
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j)
      labels.push_back("cov[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  return labels;
}

/// Values of all estimator components for one moment record, in label order.
inline std::vector<double> estimator_values(const MomentRecord& rec) {
  std::vector<double> values;
  const Eigen::Index d = rec.mean.size();
  for (Eigen::Index i = 0; i < d; ++i) values.push_back(rec.mean(i));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) values.push_back(rec.cov(i, j));
  return values;
}

/// Sample mean and variance (divisor R-1). The result depends only on the
/// multiset of values up to floating-point roundoff of the fixed-order sums.
inline std::pair<double, double> mean_and_variance(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, values.size() > 1 ? ss / (n - 1.0) : 0.0};
}

/// Closed-form simulation variance of the empirical mean and empirical
/// variance estimators in the unit pure-diffusion setup (d = 1, A = 0, C = 0,
/// N(0,1) initial law): Monte-Carlo grows with time, the optimal-transport
/// dynamics stay at their initial value.
inline std::pair<double, double> analytic_reference(FilterKind kind, double t,
                                                    Eigen::Index n_particles) {
  const double n = static_cast<double>(n_particles);
  switch (kind) {
    case FilterKind::monte_carlo:
      return {(1.0 + t) / n, 3.0 * (1.0 + t) * (1.0 + t) / n};
    case FilterKind::ot_fpf:
      return {1.0 / n, 3.0 / n};
    case FilterKind::fpf:
      break;
  }
  throw unsupported_reference_error(
      "analytic_reference: no closed form for the requested filter kind");
}

/// True when the analytic reference curves apply to this setup.
inline bool is_unit_pure_diffusion(const LinearGaussianModel& model,
                                   const GaussianBelief& init) {
  return model.state_dim() == 1 && model.A().isZero(0.0) && model.C().isZero(0.0) &&
         init.cov.matrix()(0, 0) == 1.0;
}

namespace detail {

// values[label][time][rep] -> aggregated series, with optional reference curves.
inline std::vector<EstimatorSeries> aggregate_series(
    FilterKind kind, const std::vector<std::string>& labels,
    const std::vector<Eigen::MatrixXd>& values, const std::vector<double>& times,
    Eigen::Index n_particles, bool attach_reference) {
  std::vector<EstimatorSeries> out;
  for (std::size_t li = 0; li < labels.size(); ++li) {
    EstimatorSeries s{kind, labels[li], {}, {}, {}};
    const Eigen::MatrixXd& v = values[li];
    for (Eigen::Index ti = 0; ti < v.rows(); ++ti) {
      std::vector<double> row(v.row(ti).begin(), v.row(ti).end());
      const auto [mean, var] = mean_and_variance(row);
      s.rep_mean.push_back(mean);
      s.sim_var.push_back(var);
      double ref = kMissingValue;
      if (attach_reference) {
        const auto [ref_mean, ref_var] =
            analytic_reference(kind, times[static_cast<std::size_t>(ti)], n_particles);
        if (s.estimator == "mean[0]") ref = ref_mean;
        if (s.estimator == "cov[0][0]") ref = ref_var;
      }
      s.ref_var.push_back(ref);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Replicated-run variance study: R independent replications of run_filter,
/// each with a fresh i.i.d. initial ensemble and its own observation path,
/// aggregated into cross-replication mean and variance of every estimator
/// component. Analytic reference curves are attached in the unit
/// pure-diffusion setup for the Monte-Carlo and optimal-transport kinds.
inline ExperimentReport run_variance_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = step_count(cfg.t_max, cfg.dt);
  const std::vector<std::string> labels = estimator_labels(cfg.model.state_dim());

  std::vector<Eigen::MatrixXd> values(
      labels.size(), Eigen::MatrixXd(n + 1, cfg.replications));
  std::vector<double> times;

  for (Eigen::Index r = 0; r < cfg.replications; ++r) {
    const std::uint64_t path_seed = seeds::stream(cfg.seed, "replication-path",
                                                  static_cast<std::uint64_t>(r));
    const std::uint64_t filter_seed = seeds::stream(cfg.seed, "replication-filter",
                                                    static_cast<std::uint64_t>(r));
    FilterRun run;
    try {
      const ObservationPath obs =
          simulate_truth_and_observations(cfg.model, cfg.init, cfg.t_max, cfg.dt, path_seed)
              .observations;
      run = run_filter(cfg.kind, cfg.model, cfg.init, obs, cfg.particles, filter_seed);
    } catch (const error& e) {
      throw error(std::string(e.what()) + " (replication " + std::to_string(r) +
                  ", filter seed " + std::to_string(filter_seed) + ")");
    }
    if (times.empty())
      for (const auto& rec : run.moments) times.push_back(rec.time);
    for (std::size_t k = 0; k < run.moments.size(); ++k) {
      const std::vector<double> vals = estimator_values(run.moments[k]);
      for (std::size_t li = 0; li < labels.size(); ++li)
        values[li](static_cast<Eigen::Index>(k), r) = vals[li];
    }
  }

  const bool attach = (cfg.kind != FilterKind::fpf) &&
                      is_unit_pure_diffusion(cfg.model, cfg.init);
  ExperimentReport report;
  report.times = times;
  report.series = detail::aggregate_series(cfg.kind, labels, values, times,
                                           cfg.particles, attach);
  return report;
}

/// FPF vs OT-FPF on one shared observation path: R replications per kind,
/// conditioned on the same observations. Replication r of both kinds starts
/// from the same initial ensemble. No analytic reference curves exist here.
inline ExperimentReport run_filtering_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = step_count(cfg.t_max, cfg.dt);
  const std::vector<std::string> labels = estimator_labels(cfg.model.state_dim());
  const ObservationPath obs =
      simulate_truth_and_observations(cfg.model, cfg.init, cfg.t_max, cfg.dt,
                                      seeds::stream(cfg.seed, "shared-path"))
          .observations;

  ExperimentReport report;
  for (const FilterKind kind : {FilterKind::fpf, FilterKind::ot_fpf}) {
    std::vector<Eigen::MatrixXd> values(
        labels.size(), Eigen::MatrixXd(n + 1, cfg.replications));
    std::vector<double> times;
    for (Eigen::Index r = 0; r < cfg.replications; ++r) {
      const std::uint64_t filter_seed = seeds::stream(cfg.seed, "replication-filter",
                                                      static_cast<std::uint64_t>(r));
      FilterRun run;
      try {
        run = run_filter(kind, cfg.model, cfg.init, obs, cfg.particles, filter_seed);
      } catch (const error& e) {
        throw error(std::string(e.what()) + " (replication " + std::to_string(r) +
                    ", filter seed " + std::to_string(filter_seed) + ")");
      }
      if (times.empty())
        for (const auto& rec : run.moments) times.push_back(rec.time);
      for (std::size_t k = 0; k < run.moments.size(); ++k) {
        const std::vector<double> vals = estimator_values(run.moments[k]);
        for (std::size_t li = 0; li < labels.size(); ++li)
          values[li](static_cast<Eigen::Index>(k), r) = vals[li];
      }
    }
    if (report.times.empty()) report.times = times;
    auto series = detail::aggregate_series(kind, labels, values, times, cfg.particles,
                                           /*attach_reference=*/false);
    for (auto& s : series) report.series.push_back(std::move(s));
  }
  return report;
}

}  // namespace otfpf
