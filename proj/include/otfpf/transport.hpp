#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/ensemble.hpp"
#include "otfpf/errors.hpp"
#include "otfpf/matrix_equations.hpp"
#include "otfpf/model.hpp"

namespace otfpf {

/// Affine map x -> offset + gain (x - anchor).
struct AffineMap {
  Eigen::VectorXd anchor;
  Eigen::VectorXd offset;
  Eigen::MatrixXd gain;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    return offset + gain * (x - anchor);
  }
};

/// Applies the map to every particle; the result is independent of particle order.
inline Ensemble apply_map(const AffineMap& map, const Ensemble& ens) {
  Eigen::MatrixXd p =
      (ens.particles().rowwise() - map.anchor.transpose()) * map.gain.transpose();
  p.rowwise() += map.offset.transpose();
  return Ensemble(std::move(p));
}

/// Optimal transport map between Gaussians:
///   T(x) = to.mean + F (x - from.mean),
///   F = Sy^{1/2} (Sy^{1/2} Sx Sy^{1/2})^{-1/2} Sy^{1/2},
/// where Sx, Sy are the two covariances. F is symmetric positive definite and
/// pushes N(from) exactly onto N(to): F Sx F = Sy.
inline AffineMap gaussian_ot_map(const GaussianBelief& from, const GaussianBelief& to) {
  if (from.dim() != to.dim())
    throw invalid_input_error("gaussian_ot_map: dimension mismatch");
  from.cov.require_strictly_positive_definite("gaussian_ot_map");
  to.cov.require_strictly_positive_definite("gaussian_ot_map");

  const Eigen::MatrixXd sy = spd_sqrt(to.cov).matrix();
  const SpdMatrix inner(symmetrized(sy * from.cov.matrix() * sy));
  const Eigen::MatrixXd f = symmetrized(sy * spd_inv_sqrt(inner).matrix() * sy);
  return {from.mean, to.mean, f};
}

/// Squared L2-Wasserstein distance between Gaussians,
///   W2^2 = |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sb^{1/2} Sa Sb^{1/2})^{1/2}).
/// Covariances may be singular (PSD); the result is clamped at zero.
inline double wasserstein2_gaussians(const GaussianBelief& a, const GaussianBelief& b) {
  if (a.dim() != b.dim())
    throw invalid_input_error("wasserstein2_gaussians: dimension mismatch");
  const Eigen::MatrixXd sb = spd_sqrt(b.cov).matrix();
  const Eigen::MatrixXd cross =
      spd_sqrt(SpdMatrix(symmetrized(sb * a.cov.matrix() * sb))).matrix();
  const double value = (a.mean - b.mean).squaredNorm() +
                       (a.cov.matrix() + b.cov.matrix() - 2.0 * cross).trace();
  return std::max(value, 0.0);
}

/// Discrete transport construction: runs the Kalman-Bucy filter over the grid
/// and pushes the ensemble through the optimal map between each pair of
/// consecutive posteriors. Returns ensembles at all n+1 grid points; the
/// caller is responsible for drawing the initial particles from init.
inline std::vector<Ensemble> time_stepping_process(const LinearGaussianModel& model,
                                                   const GaussianBelief& init,
                                                   const ObservationPath& obs,
                                                   const Ensemble& particles) {
  if (particles.dim() != model.state_dim())
    throw invalid_input_error("time_stepping_process: ensemble dimension mismatch");
  const std::vector<GaussianBelief> beliefs = run_kalman_bucy(model, init, obs);

  std::vector<Ensemble> out;
  out.reserve(beliefs.size());
  out.push_back(particles);
  for (std::size_t k = 0; k + 1 < beliefs.size(); ++k)
    out.push_back(apply_map(gaussian_ot_map(beliefs[k], beliefs[k + 1]), out.back()));
  return out;
}

/// First-order defect of the transport gain: advances Sigma by one explicit
/// Euler Riccati step, forms F from the square-root sandwich between the two
/// covariances, solves for the drift gain G, and returns ||F - I - G dt||_F.
/// For an exact filter covariance flow this is O(dt^2).
inline double lemma1_residual(const LinearGaussianModel& model, const SpdMatrix& sigma,
                              double dt) {
  if (!(dt > 0.0)) throw config_error("lemma1_residual: dt must be positive");
  if (sigma.dim() != model.state_dim())
    throw invalid_input_error("lemma1_residual: dimension mismatch");
  sigma.require_strictly_positive_definite("lemma1_residual");

  const Eigen::Index d = sigma.dim();
  const Eigen::MatrixXd& s = sigma.matrix();
  const Eigen::MatrixXd riccati =
      symmetrized(model.A() * s + s * model.A().transpose() +
                  Eigen::MatrixXd::Identity(d, d) -
                  s * model.C().transpose() * model.C() * s);
  const SpdMatrix advanced(symmetrized(s + riccati * dt));

  const Eigen::MatrixXd sy = spd_sqrt(advanced).matrix();
  const SpdMatrix inner(symmetrized(sy * s * sy));
  const Eigen::MatrixXd f = symmetrized(sy * spd_inv_sqrt(inner).matrix() * sy);
  const Eigen::MatrixXd g = solve_lyapunov(sigma, riccati);
  return (f - Eigen::MatrixXd::Identity(d, d) - g * dt).norm();
}

}  // namespace otfpf
