#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/errors.hpp"

namespace otfpf {

inline constexpr double kSymmetryTol = 1e-10;  // relative to the largest entry
inline constexpr double kPsdTol = 1e-10;       // eigenvalue floor relative to the 2-norm

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_symmetric_within(const Eigen::MatrixXd& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.transpose()) <= tol * max_abs(m);
}

inline bool is_skew_symmetric_within(const Eigen::MatrixXd& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m + m.transpose()) <= tol * max_abs(m);
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

/// Symmetric positive semidefinite matrix. Construction validates symmetry and
/// the eigenvalue floor; strictly-PD contexts additionally check pd_floor().
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw invalid_input_error("SpdMatrix: expected a nonempty square matrix");
    if (!m_.allFinite()) throw invalid_input_error("SpdMatrix: entries must be finite");
    if (!is_symmetric_within(m_))
      throw invalid_input_error("SpdMatrix: matrix is not symmetric within tolerance");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    min_eig_ = es.eigenvalues().minCoeff();
    op_norm_ = es.eigenvalues().cwiseAbs().maxCoeff();
    if (min_eig_ < -kPsdTol * op_norm_)
      throw not_psd_error("SpdMatrix: eigenvalue below the PSD tolerance");
  }

  static SpdMatrix identity(Eigen::Index d) {
    return SpdMatrix(Eigen::MatrixXd::Identity(d, d));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double min_eigenvalue() const { return min_eig_; }
  double operator_norm() const { return op_norm_; }

  /// Eigenvalues at or below this count as zero in strictly-PD contexts.
  double pd_floor() const { return 1e-12 * std::max(1.0, op_norm_); }

  bool strictly_positive_definite() const { return min_eig_ > pd_floor(); }

  void require_strictly_positive_definite(const char* context) const {
    if (!strictly_positive_definite())
      throw singular_matrix_error(std::string(context) +
                                  ": matrix is singular at working precision");
  }

 private:
  Eigen::MatrixXd m_;
  double min_eig_ = 0.0;
  double op_norm_ = 0.0;
};

/// Skew-symmetric matrix; construction validates skewness.
class SkewMatrix {
 public:
  explicit SkewMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw invalid_input_error("SkewMatrix: expected a nonempty square matrix");
    if (!m_.allFinite()) throw invalid_input_error("SkewMatrix: entries must be finite");
    if (!is_skew_symmetric_within(m_))
      throw invalid_input_error("SkewMatrix: matrix is not skew-symmetric within tolerance");
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

/// Symmetric PSD square root via eigendecomposition; eigenvalues are clamped
/// at zero before the square root.
inline SpdMatrix spd_sqrt(const SpdMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix());
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd root =
      es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(symmetrized(root));
}

/// Inverse symmetric square root; the input must be strictly positive definite.
inline SpdMatrix spd_inv_sqrt(const SpdMatrix& m) {
  m.require_strictly_positive_definite("spd_inv_sqrt");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix());
  const Eigen::MatrixXd root = es.eigenvectors() *
                               es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
  return SpdMatrix(symmetrized(root));
}

namespace detail {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

inline constexpr Eigen::Index kMaxLyapunovDim = 32;

/// Solves G Sigma + Sigma G = rhs for the unique G; a symmetric rhs yields a
/// symmetric G. Dense Kronecker vectorization (I(x)Sigma + Sigma(x)I), intended
/// for the small state dimensions this library targets (d <= 32).
inline Eigen::MatrixXd solve_lyapunov(const SpdMatrix& sigma, const Eigen::MatrixXd& rhs) {
  const Eigen::Index d = sigma.dim();
  if (d > kMaxLyapunovDim)
    throw invalid_input_error("solve_lyapunov: dimension above the supported range");
  if (rhs.rows() != d || rhs.cols() != d)
    throw invalid_input_error("solve_lyapunov: rhs dimension mismatch");
  if (!is_symmetric_within(rhs))
    throw invalid_input_error("solve_lyapunov: rhs must be symmetric");
  sigma.require_strictly_positive_definite("solve_lyapunov");

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd system =
      detail::kron(id, sigma.matrix()) + detail::kron(sigma.matrix(), id);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (lu.rcond() < 1e-14)
    throw singular_matrix_error("solve_lyapunov: Kronecker system is numerically singular");
  const Eigen::Map<const Eigen::VectorXd> vec_rhs(rhs.data(), d * d);
  const Eigen::VectorXd x = lu.solve(vec_rhs);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), d, d);
}

/// Solves Omega S + S Omega = rhs for skew-symmetric Omega, with S symmetric
/// positive definite and rhs skew-symmetric. Dense solve on the d(d-1)/2
/// dimensional skew basis; for d = 1 the solution is 0.
inline SkewMatrix solve_skew_equation(const SpdMatrix& sigma_inv, const Eigen::MatrixXd& rhs) {
  const Eigen::Index d = sigma_inv.dim();
  if (rhs.rows() != d || rhs.cols() != d)
    throw invalid_input_error("solve_skew_equation: rhs dimension mismatch");
  if (!is_skew_symmetric_within(rhs))
    throw invalid_input_error("solve_skew_equation: rhs must be skew-symmetric");
  sigma_inv.require_strictly_positive_definite("solve_skew_equation");

  const Eigen::Index n = d * (d - 1) / 2;
  if (n == 0) return SkewMatrix(Eigen::MatrixXd::Zero(d, d));

  // Basis E_pq = e_p e_q' - e_q e_p' for p < q; a skew matrix X has coordinate
  // X(p, q) on E_pq.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> basis;
  basis.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < d; ++p)
    for (Eigen::Index q = p + 1; q < d; ++q) basis.emplace_back(p, q);

  const Eigen::MatrixXd& s = sigma_inv.matrix();
  Eigen::MatrixXd system(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [r, c] = basis[static_cast<std::size_t>(j)];
    // image = E_rc S + S E_rc, assembled from rank-two row/column updates
    Eigen::MatrixXd image = Eigen::MatrixXd::Zero(d, d);
    image.row(r) += s.row(c);
    image.row(c) -= s.row(r);
    image.col(c) += s.col(r);
    image.col(r) -= s.col(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [p, q] = basis[static_cast<std::size_t>(i)];
      system(i, j) = image(p, q);
    }
  }

  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [p, q] = basis[static_cast<std::size_t>(i)];
    b(i) = rhs(p, q);
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (lu.rcond() < 1e-14)
    throw singular_matrix_error("solve_skew_equation: basis system is numerically singular");
  const Eigen::VectorXd x = lu.solve(b);

  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [p, q] = basis[static_cast<std::size_t>(i)];
    omega(p, q) = x(i);
    omega(q, p) = -x(i);
  }
  return SkewMatrix(std::move(omega));
}

}  // namespace otfpf
