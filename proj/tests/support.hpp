#pragma once

// Shared helpers for the test suites: seeded random SPD matrices, random
// orthogonal matrices, relative residuals.

#include <algorithm>
#include <random>

#include <Eigen/Dense>

#include "otfpf/matrix_equations.hpp"
#include "otfpf/rng.hpp"

namespace otfpf::testing {

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index d) {
  const Eigen::MatrixXd g = standard_normal(rng, d, d);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

inline SpdMatrix random_spd(std::mt19937_64& rng, Eigen::Index d, double min_eig = 0.2,
                            double max_eig = 5.0) {
  const Eigen::MatrixXd q = random_orthogonal(rng, d);
  std::uniform_real_distribution<double> uni(min_eig, max_eig);
  Eigen::VectorXd eigs(d);
  for (Eigen::Index i = 0; i < d; ++i) eigs(i) = uni(rng);
  return SpdMatrix(symmetrized(q * eigs.asDiagonal() * q.transpose()));
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index d) {
  return symmetrized(standard_normal(rng, d, d));
}

inline Eigen::MatrixXd random_skew(std::mt19937_64& rng, Eigen::Index d) {
  const Eigen::MatrixXd g = standard_normal(rng, d, d);
  return 0.5 * (g - g.transpose());
}

/// Frobenius residual of x against a reference scale.
inline double rel_fro(const Eigen::MatrixXd& err, const Eigen::MatrixXd& scale) {
  return err.norm() / std::max(scale.norm(), 1e-300);
}

}  // namespace otfpf::testing
