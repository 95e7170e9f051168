#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/errors.hpp"
#include "otfpf/matrix_equations.hpp"
#include "otfpf/model.hpp"
#include "otfpf/rng.hpp"

namespace otfpf {

enum class FilterKind { monte_carlo, fpf, ot_fpf };

constexpr std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::monte_carlo: return "monte_carlo";
    case FilterKind::fpf: return "fpf";
    case FilterKind::ot_fpf: return "ot_fpf";
  }
  return "unknown";
}

inline FilterKind filter_kind_from_string(std::string_view text) {
  if (text == "monte_carlo") return FilterKind::monte_carlo;
  if (text == "fpf") return FilterKind::fpf;
  if (text == "ot_fpf") return FilterKind::ot_fpf;
  throw config_error("unknown filter kind '" + std::string(text) +
                     "' (expected monte_carlo, fpf or ot_fpf)");
}

/// N particles in R^d, one row per particle. Empirical moments use divisor N.
class Ensemble {
 public:
  explicit Ensemble(Eigen::MatrixXd particles) : p_(std::move(particles)) {
    if (p_.rows() < 2) throw config_error("Ensemble: at least 2 particles required");
    if (p_.cols() < 1) throw invalid_input_error("Ensemble: state dimension must be >= 1");
  }

  Eigen::Index size() const { return p_.rows(); }
  Eigen::Index dim() const { return p_.cols(); }
  const Eigen::MatrixXd& particles() const { return p_; }

  Eigen::VectorXd empirical_mean() const { return p_.colwise().mean().transpose(); }

  Eigen::MatrixXd empirical_cov() const {
    const Eigen::RowVectorXd mean = p_.colwise().mean();
    const Eigen::MatrixXd centered = p_.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(p_.rows());
  }

 private:
  Eigen::MatrixXd p_;
};

namespace detail {

inline SpdMatrix ensemble_cov_spd(const Ensemble& ens, const char* context) {
  try {
    SpdMatrix cov(symmetrized(ens.empirical_cov()));
    if (!cov.strictly_positive_definite())
      throw degenerate_ensemble_error(std::string(context) +
                                      ": empirical covariance collapsed below the PD floor");
    return cov;
  } catch (const not_psd_error&) {
    throw degenerate_ensemble_error(std::string(context) +
                                    ": empirical covariance collapsed below the PD floor");
  }
}

}  // namespace detail

/// N i.i.d. draws from the given Gaussian; deterministic given the seed
/// (row i consumes the i-th d-block of the stream).
inline Ensemble init_ensemble(const GaussianBelief& init, Eigen::Index n_particles,
                              std::uint64_t seed) {
  if (n_particles < 2) throw config_error("init_ensemble: at least 2 particles required");
  init.cov.require_strictly_positive_definite("init_ensemble");
  const Eigen::LLT<Eigen::MatrixXd> llt(init.cov.matrix());
  if (llt.info() != Eigen::Success)
    throw singular_matrix_error("init_ensemble: covariance factorization failed");

  auto rng = make_rng(seed);
  Eigen::MatrixXd p =
      standard_normal(rng, n_particles, init.dim()) * llt.matrixL().transpose();
  p.rowwise() += init.mean.transpose();
  return Ensemble(std::move(p));
}

/// Pure diffusion step S_i += sqrt(dt) xi_i.
inline Ensemble mc_step(const Ensemble& ens, double dt, std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw config_error("mc_step: dt must be positive");
  return Ensemble(ens.particles() + std::sqrt(dt) * standard_normal(rng, ens.size(), ens.dim()));
}

/// One Euler-Maruyama step of the stochastic feedback particle filter:
///   S_i += A S_i dt + sqrt(dt) xi_i + K (dZ - C (S_i + mean)/2 dt),
/// with K = cov C'. Empirical moments are frozen at the pre-step ensemble.
inline Ensemble fpf_step(const LinearGaussianModel& model, const Ensemble& ens,
                         const Eigen::VectorXd& dz, double dt, std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw config_error("fpf_step: dt must be positive");
  if (ens.dim() != model.state_dim() || dz.size() != model.obs_dim())
    throw invalid_input_error("fpf_step: dimension mismatch");

  const Eigen::VectorXd mean = ens.empirical_mean();
  const SpdMatrix cov = detail::ensemble_cov_spd(ens, "fpf_step");
  const Eigen::MatrixXd gain = cov.matrix() * model.C().transpose();
  const Eigen::MatrixXd gain_c = gain * model.C();

  const Eigen::MatrixXd& p = ens.particles();
  Eigen::MatrixXd next =
      p + dt * (p * model.A().transpose()) + std::sqrt(dt) * standard_normal(rng, ens.size(), ens.dim());
  next.rowwise() += (gain * dz).transpose();
  Eigen::MatrixXd shifted = p;
  shifted.rowwise() += mean.transpose();
  next -= (0.5 * dt) * (shifted * gain_c.transpose());
  return Ensemble(std::move(next));
}

/// One Euler step of the deterministic optimal-transport particle filter:
///   S_i += [A mean + G (S_i - mean)] dt + K (dZ - C mean dt),
/// where G solves G cov + cov G = A cov + cov A' + I - cov C'C cov and
/// K = cov C'. Fully deterministic given the ensemble and dZ.
inline Ensemble ot_fpf_step(const LinearGaussianModel& model, const Ensemble& ens,
                            const Eigen::VectorXd& dz, double dt) {
  if (!(dt > 0.0)) throw config_error("ot_fpf_step: dt must be positive");
  if (ens.dim() != model.state_dim() || dz.size() != model.obs_dim())
    throw invalid_input_error("ot_fpf_step: dimension mismatch");

  const Eigen::VectorXd mean = ens.empirical_mean();
  const SpdMatrix cov = detail::ensemble_cov_spd(ens, "ot_fpf_step");
  const Eigen::MatrixXd& sigma = cov.matrix();
  const Eigen::Index d = model.state_dim();
  const Eigen::MatrixXd gain = sigma * model.C().transpose();
  const Eigen::MatrixXd rhs =
      symmetrized(model.A() * sigma + sigma * model.A().transpose() +
                  Eigen::MatrixXd::Identity(d, d) -
                  sigma * model.C().transpose() * model.C() * sigma);
  const Eigen::MatrixXd g = solve_lyapunov(cov, rhs);

  const Eigen::MatrixXd centered = ens.particles().rowwise() - mean.transpose();
  Eigen::MatrixXd next = ens.particles() + dt * (centered * g.transpose());
  next.rowwise() +=
      (model.A() * mean * dt + gain * (dz - model.C() * mean * dt)).transpose();
  return Ensemble(std::move(next));
}

struct MomentRecord {
  double time;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct FilterRun {
  std::vector<MomentRecord> moments;            // one record per grid point
  std::vector<Eigen::MatrixXd> snapshots;       // particle positions, if requested
};

/// Applies the chosen one-step integrator over the whole observation grid and
/// records empirical moments at every grid point. The rng drives Monte-Carlo
/// and FPF noise; the OT filter ignores it and is a pure function of the
/// initial ensemble and the observation path.
inline FilterRun run_filter(FilterKind kind, const LinearGaussianModel& model,
                            Ensemble ens, const ObservationPath& obs,
                            std::mt19937_64& rng, bool record_particles = false) {
  if (ens.dim() != model.state_dim())
    throw invalid_input_error("run_filter: ensemble dimension mismatch");
  if (obs.obs_dim() != model.obs_dim())
    throw invalid_input_error("run_filter: observation dimension mismatch");

  FilterRun run;
  run.moments.reserve(static_cast<std::size_t>(obs.steps()) + 1);
  const auto record = [&](double t, const Ensemble& e) {
    run.moments.push_back({t, e.empirical_mean(), e.empirical_cov()});
    if (record_particles) run.snapshots.push_back(e.particles());
  };

  record(obs.times().front(), ens);
  for (Eigen::Index k = 0; k < obs.steps(); ++k) {
    try {
      switch (kind) {
        case FilterKind::monte_carlo:
          ens = mc_step(ens, obs.dt(), rng);
          break;
        case FilterKind::fpf:
          ens = fpf_step(model, ens, obs.dz().row(k).transpose(), obs.dt(), rng);
          break;
        case FilterKind::ot_fpf:
          ens = ot_fpf_step(model, ens, obs.dz().row(k).transpose(), obs.dt());
          break;
      }
    } catch (const degenerate_ensemble_error& e) {
      throw degenerate_ensemble_error(std::string(e.what()) + " (step " + std::to_string(k) +
                                      ", t = " + std::to_string(obs.times()[static_cast<std::size_t>(k)]) + ")");
    }
    record(obs.times()[static_cast<std::size_t>(k) + 1], ens);
  }
  return run;
}

/// Seeded convenience overload: the initial ensemble comes from stream "init",
/// integrator noise from stream "noise".
inline FilterRun run_filter(FilterKind kind, const LinearGaussianModel& model,
                            const GaussianBelief& init, const ObservationPath& obs,
                            Eigen::Index n_particles, std::uint64_t seed,
                            bool record_particles = false) {
  Ensemble ens = init_ensemble(init, n_particles, seeds::stream(seed, "init"));
  auto rng = make_rng(seed, "noise");
  return run_filter(kind, model, std::move(ens), obs, rng, record_particles);
}

}  // namespace otfpf
