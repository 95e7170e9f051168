#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "otfpf/model.hpp"
#include "support.hpp"

using namespace otfpf;

namespace {

LinearGaussianModel scalar_model(double a, double c) {
  Eigen::MatrixXd am(1, 1), cm(1, 1);
  am << a;
  cm << c;
  return {am, cm};
}

GaussianBelief scalar_belief(double mean, double var) {
  Eigen::VectorXd m(1);
  m << mean;
  Eigen::MatrixXd v(1, 1);
  v << var;
  return {m, SpdMatrix(v)};
}

}  // namespace

TEST_CASE("simulate is reproducible bit for bit") {
  const auto model = scalar_model(0.3, 1.0);
  const auto init = scalar_belief(0.5, 2.0);
  const auto one = simulate_truth_and_observations(model, init, 0.1, 0.01, 99);
  const auto two = simulate_truth_and_observations(model, init, 0.1, 0.01, 99);
  CHECK(one.truth == two.truth);
  CHECK(one.observations.dz() == two.observations.dz());

  const auto other = simulate_truth_and_observations(model, init, 0.1, 0.01, 100);
  CHECK(one.truth != other.truth);
}

TEST_CASE("simulate rejects bad steps") {
  const auto model = scalar_model(0.0, 0.0);
  const auto init = scalar_belief(0.0, 1.0);
  CHECK_THROWS_AS(simulate_truth_and_observations(model, init, 1.0, 0.0, 1), config_error);
  CHECK_THROWS_AS(simulate_truth_and_observations(model, init, 0.001, 0.01, 1), config_error);
}

TEST_CASE("decoupled observations are Brownian increments") {
  // C = 0: dZ_k are i.i.d. N(0, dt), so the sample variance over n steps
  // should match dt within 5 standard errors.
  const auto model = scalar_model(0.0, 0.0);
  const auto init = scalar_belief(0.0, 1.0);
  const double dt = 1e-3;
  const int n = 4000;
  const auto sim = simulate_truth_and_observations(model, init, n * dt, dt, 7);
  const Eigen::VectorXd dz = sim.observations.dz().col(0);
  const double var = dz.squaredNorm() / n - std::pow(dz.mean(), 2);
  const double se = dt * std::sqrt(2.0 / n);
  CHECK(std::abs(var - dt) <= 5.0 * se);
}

TEST_CASE("pure diffusion truth variance grows like t") {
  // d=1, A=0: Var(X_t) = var_0 + t; checked over replications at t = 1.
  const auto model = scalar_model(0.0, 0.0);
  const auto init = scalar_belief(0.0, 1.0);
  const int reps = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto sim = simulate_truth_and_observations(model, init, 1.0, 0.05, 1000 + r);
    const double x = sim.truth(sim.truth.rows() - 1, 0);
    sum += x;
    sum_sq += x * x;
  }
  const double var = sum_sq / reps - std::pow(sum / reps, 2);
  const double se = 2.0 * std::sqrt(2.0 / reps);  // sd of the sample variance of N(0,2)
  CHECK(std::abs(var - 2.0) <= 3.0 * se);
}

TEST_CASE("kalman_bucy_step holds the scalar steady state") {
  // a=0, c=1, var=1: the Riccati increment 1 - var^2 vanishes.
  const auto model = scalar_model(0.0, 1.0);
  const auto belief = scalar_belief(0.2, 1.0);
  Eigen::VectorXd dz(1);
  dz << 0.37;
  const auto next = kalman_bucy_step(model, belief, dz, 1e-3);
  CHECK(next.cov.matrix()(0, 0) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("kalman_bucy_step grows the covariance by I dt without observations") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 2);
  const LinearGaussianModel model(a, c);
  auto rng = make_rng(5, "cov");
  const SpdMatrix cov = otfpf::testing::random_spd(rng, 2);
  const GaussianBelief belief(Eigen::VectorXd::Zero(2), cov);
  Eigen::VectorXd dz(1);
  dz << 0.0;
  const double dt = 0.01;
  const auto next = kalman_bucy_step(model, belief, dz, dt);
  CHECK((next.cov.matrix() - cov.matrix() - dt * Eigen::MatrixXd::Identity(2, 2))
            .isZero(1e-15));
}

TEST_CASE("kalman_bucy_step keeps a zero mean at zero without innovation") {
  const auto model = scalar_model(0.4, 1.3);
  const auto belief = scalar_belief(0.0, 1.0);
  Eigen::VectorXd dz = Eigen::VectorXd::Zero(1);
  CHECK(kalman_bucy_step(model, belief, dz, 1e-3).mean(0) == 0.0);
}

TEST_CASE("kalman_bucy_step reports instability for oversized steps") {
  // var=1, c=10: the explicit Riccati step jumps to a negative variance.
  const auto model = scalar_model(0.0, 10.0);
  const auto belief = scalar_belief(0.0, 1.0);
  Eigen::VectorXd dz(1);
  dz << 0.0;
  CHECK_THROWS_AS(kalman_bucy_step(model, belief, dz, 0.1), numerical_instability_error);
}

TEST_CASE("run_kalman_bucy handles an empty grid") {
  const auto model = scalar_model(0.0, 1.0);
  const auto init = scalar_belief(0.0, 1.0);
  const ObservationPath obs(1e-3, {0.0}, Eigen::MatrixXd::Zero(0, 1));
  const auto beliefs = run_kalman_bucy(model, init, obs);
  REQUIRE(beliefs.size() == 1);
  CHECK(beliefs[0].mean == init.mean);
}

TEST_CASE("run_kalman_bucy: steady state and pure diffusion covariances") {
  const double dt = 1e-3;
  {
    const auto model = scalar_model(0.0, 1.0);
    const auto init = scalar_belief(0.0, 1.0);
    const auto sim = simulate_truth_and_observations(model, init, 1.0, dt, 21);
    const auto beliefs = run_kalman_bucy(model, init, sim.observations);
    for (const auto& b : beliefs) CHECK(std::abs(b.cov.matrix()(0, 0) - 1.0) < 1e-12);
  }
  {
    const auto model = scalar_model(0.0, 0.0);
    const auto init = scalar_belief(0.0, 1.0);
    const auto sim = simulate_truth_and_observations(model, init, 1.0, dt, 22);
    const auto beliefs = run_kalman_bucy(model, init, sim.observations);
    CHECK(std::abs(beliefs.back().cov.matrix()(0, 0) - 2.0) < 1e-9);
  }
}

TEST_CASE("observable scalar Riccati flow approaches 1/|c|") {
  const double c = 2.0;
  const auto model = scalar_model(0.0, c);
  const auto init = scalar_belief(0.0, 3.0);
  const double dt = 1e-3;
  const auto sim = simulate_truth_and_observations(model, init, 6.0, dt, 23);
  const auto beliefs = run_kalman_bucy(model, init, sim.observations);

  const double target = 1.0 / std::abs(c);
  double prev_gap = std::abs(beliefs[1000].cov.matrix()(0, 0) - target);
  for (std::size_t k = 2000; k < beliefs.size(); k += 1000) {
    const double gap = std::abs(beliefs[k].cov.matrix()(0, 0) - target);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(prev_gap < 5e-3);
}

TEST_CASE("covariance stays symmetric along an observable d=2 run") {
  Eigen::MatrixXd a(2, 2), c(1, 2);
  a << 0.0, 1.0, -1.0, -0.5;
  c << 1.0, 0.0;
  const LinearGaussianModel model(a, c);
  Eigen::MatrixXd cov0(2, 2);
  cov0 << 2.0, 0.3, 0.3, 0.5;
  const GaussianBelief init(Eigen::VectorXd::Zero(2), SpdMatrix(cov0));
  const auto sim = simulate_truth_and_observations(model, init, 1.0, 1e-3, 24);
  const auto beliefs = run_kalman_bucy(model, init, sim.observations);
  for (const auto& b : beliefs)
    CHECK(max_abs(b.cov.matrix() - b.cov.matrix().transpose()) <=
          1e-10 * max_abs(b.cov.matrix()));
}
