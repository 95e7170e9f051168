#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/errors.hpp"
#include "otfpf/matrix_equations.hpp"
#include "otfpf/rng.hpp"

namespace otfpf {

/// Linear state-space model dX = A X dt + dB, dZ = C X dt + dW. Process and
/// observation noise covariances are fixed to identity. Observability of
/// (A, C) is a caller obligation and is not checked here.
class LinearGaussianModel {
 public:
  LinearGaussianModel(Eigen::MatrixXd a, Eigen::MatrixXd c)
      : a_(std::move(a)), c_(std::move(c)) {
    if (a_.rows() < 1 || a_.rows() != a_.cols())
      throw config_error("model: A must be a square d x d matrix with d >= 1");
    if (c_.rows() < 1 || c_.cols() != a_.rows())
      throw config_error("model: C must be m x d with m >= 1");
    if (!a_.allFinite() || !c_.allFinite())
      throw config_error("model: A and C entries must be finite");
  }

  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::MatrixXd& C() const { return c_; }
  Eigen::Index state_dim() const { return a_.rows(); }
  Eigen::Index obs_dim() const { return c_.rows(); }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd c_;
};

/// Gaussian state estimate: mean vector plus SPD covariance.
struct GaussianBelief {
  Eigen::VectorXd mean;
  SpdMatrix cov;

  GaussianBelief(Eigen::VectorXd mean_in, SpdMatrix cov_in)
      : mean(std::move(mean_in)), cov(std::move(cov_in)) {
    if (mean.size() != cov.dim())
      throw invalid_input_error("GaussianBelief: mean/cov dimension mismatch");
  }

  Eigen::Index dim() const { return mean.size(); }
};

/// Observation increments dZ_k on the uniform grid t_0 < t_1 < ... < t_n.
class ObservationPath {
 public:
  ObservationPath(double dt, std::vector<double> times, Eigen::MatrixXd dz)
      : dt_(dt), times_(std::move(times)), dz_(std::move(dz)) {
    if (!(dt_ > 0.0)) throw config_error("ObservationPath: dt must be positive");
    if (times_.size() != static_cast<std::size_t>(dz_.rows()) + 1)
      throw invalid_input_error("ObservationPath: need one more time point than dZ rows");
    if (dz_.cols() < 1) throw invalid_input_error("ObservationPath: observation dim >= 1");
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
      if (std::abs(times_[k + 1] - times_[k] - dt_) > 1e-9 * dt_)
        throw invalid_input_error("ObservationPath: time grid is not uniformly spaced");
    }
  }

  double dt() const { return dt_; }
  const std::vector<double>& times() const { return times_; }
  const Eigen::MatrixXd& dz() const { return dz_; }
  Eigen::Index steps() const { return dz_.rows(); }
  Eigen::Index obs_dim() const { return dz_.cols(); }

 private:
  double dt_;
  std::vector<double> times_;
  Eigen::MatrixXd dz_;
};

/// Number of uniform steps covering [0, t_max]; t_max is rounded to the
/// nearest multiple of dt.
inline Eigen::Index step_count(double t_max, double dt) {
  if (!(dt > 0.0)) throw config_error("dt must be positive");
  if (!(t_max >= dt)) throw config_error("t_max must be at least dt");
  return static_cast<Eigen::Index>(std::llround(t_max / dt));
}

struct SimulatedPath {
  Eigen::MatrixXd truth;  // (n+1) x d states on the grid
  ObservationPath observations;
};

/// Euler-Maruyama draw of one hidden path and its observation increments:
///   X_{k+1} = X_k + A X_k dt + sqrt(dt) xi_k,  dZ_k = C X_k dt + sqrt(dt) eta_k.
/// Stream "truth" drives X_0 and the process noise, stream "obs" the
/// observation noise; output is deterministic given the seed.
inline SimulatedPath simulate_truth_and_observations(const LinearGaussianModel& model,
                                                     const GaussianBelief& init,
                                                     double t_max, double dt,
                                                     std::uint64_t seed) {
  const Eigen::Index n = step_count(t_max, dt);
  const Eigen::Index d = model.state_dim();
  const Eigen::Index m = model.obs_dim();
  if (init.dim() != d)
    throw invalid_input_error("simulate_truth_and_observations: init dimension mismatch");

  auto rng_truth = make_rng(seed, "truth");
  auto rng_obs = make_rng(seed, "obs");
  const Eigen::MatrixXd factor = spd_sqrt(init.cov).matrix();
  const double sq = std::sqrt(dt);

  Eigen::MatrixXd truth(n + 1, d);
  Eigen::MatrixXd dz(n, m);
  std::vector<double> times(static_cast<std::size_t>(n) + 1);

  Eigen::VectorXd x = init.mean + factor * standard_normal_vector(rng_truth, d);
  truth.row(0) = x.transpose();
  times[0] = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    dz.row(k) =
        (model.C() * x * dt + sq * standard_normal_vector(rng_obs, m)).transpose();
    x += model.A() * x * dt + sq * standard_normal_vector(rng_truth, d);
    truth.row(k + 1) = x.transpose();
    times[static_cast<std::size_t>(k) + 1] = static_cast<double>(k + 1) * dt;
  }
  return {std::move(truth), ObservationPath(dt, std::move(times), std::move(dz))};
}

/// One explicit Euler step of the Kalman-Bucy filter:
///   mean += A mean dt + K (dZ - C mean dt)           with K = cov C'
///   cov  += (A cov + cov A' + I - cov C'C cov) dt    then re-symmetrized
inline GaussianBelief kalman_bucy_step(const LinearGaussianModel& model,
                                       const GaussianBelief& belief,
                                       const Eigen::VectorXd& dz, double dt) {
  if (!(dt > 0.0)) throw config_error("kalman_bucy_step: dt must be positive");
  if (dz.size() != model.obs_dim() || belief.dim() != model.state_dim())
    throw invalid_input_error("kalman_bucy_step: dimension mismatch");
  belief.cov.require_strictly_positive_definite("kalman_bucy_step");

  const Eigen::MatrixXd& sigma = belief.cov.matrix();
  const Eigen::MatrixXd gain = sigma * model.C().transpose();
  Eigen::VectorXd mean = belief.mean + model.A() * belief.mean * dt +
                         gain * (dz - model.C() * belief.mean * dt);
  const Eigen::Index d = model.state_dim();
  const Eigen::MatrixXd riccati = model.A() * sigma + sigma * model.A().transpose() +
                                  Eigen::MatrixXd::Identity(d, d) -
                                  sigma * model.C().transpose() * model.C() * sigma;
  const Eigen::MatrixXd next = symmetrized(sigma + riccati * dt);
  try {
    SpdMatrix cov(next);
    cov.require_strictly_positive_definite("kalman_bucy_step");
    return GaussianBelief(std::move(mean), std::move(cov));
  } catch (const error&) {
    throw numerical_instability_error(
        "kalman_bucy_step: covariance lost strict positive definiteness; use a smaller dt");
  }
}

/// Runs the Kalman-Bucy filter over the whole grid; returns n+1 beliefs with
/// beliefs[0] = init.
inline std::vector<GaussianBelief> run_kalman_bucy(const LinearGaussianModel& model,
                                                   const GaussianBelief& init,
                                                   const ObservationPath& obs) {
  if (obs.obs_dim() != model.obs_dim())
    throw invalid_input_error("run_kalman_bucy: observation dimension mismatch");
  std::vector<GaussianBelief> beliefs;
  beliefs.reserve(static_cast<std::size_t>(obs.steps()) + 1);
  beliefs.push_back(init);
  for (Eigen::Index k = 0; k < obs.steps(); ++k)
    beliefs.push_back(
        kalman_bucy_step(model, beliefs.back(), obs.dz().row(k).transpose(), obs.dt()));
  return beliefs;
}

}  // namespace otfpf
