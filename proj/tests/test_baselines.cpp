#include <cmath>

#include "armcs/baselines.hpp"
#include "doctest.h"

using namespace armcs;

TEST_SUITE("baselines") {
  TEST_CASE("oracle ML is |v|^2 / M") {
    Rng rng(1);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 100, 80, 1e-2, rng);
    CHECK(oracle_ml_estimate(inst) == doctest::Approx(inst.v.squaredNorm() / 80.0).epsilon(1e-12));
  }

  TEST_CASE("oracle ML NMSE follows the chi-square law 2/M") {
    // M sigma2_hat / sigma2 ~ chi2_M, so E[(sigma2_hat/sigma2 - 1)^2] = 2/M.
    const int trials = 4000;
    const Index m = 50;
    double nmse = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng = trial_rng(5, static_cast<std::uint64_t>(t));
      const auto inst = generate_instance(SignalPrior::bernoulli(0.9), 10, m, 1e-3, rng);
      const double r = oracle_ml_estimate(inst) / 1e-3 - 1.0;
      nmse += r * r;
    }
    nmse /= trials;
    // Standard error of the mean of (chi2_M/M - 1)^2 is about sqrt(60/M^2 / trials).
    CHECK(std::abs(nmse - 2.0 / m) < 5.0 * std::sqrt((60.0 / (m * m) + 0.0) / trials));
  }

  TEST_CASE("scaled residual at a huge lambda is |y|^2 / M") {
    Rng rng(2);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 60, 40, 1e-2, rng);
    const auto r = scaled_residual_estimate(inst.A, inst.y, 1e3);
    CHECK(r.support == 0);
    CHECK(r.sigma2_hat == doctest::Approx(inst.y.squaredNorm() / 40.0));
  }

  TEST_CASE("scaled residual counts the support and divides by the remaining dof") {
    Rng rng(3);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 200, 160, 1e-2, rng);
    const LassoAdmm solver(inst.A);
    const auto r = scaled_residual_estimate(solver, inst.y, 0.1);
    const auto sol = solver.solve_regularized(inst.y, 0.1);
    const Index nnz = (sol.x_hat.array() != 0.0).count();
    CHECK(r.support == nnz);
    CHECK(r.sigma2_hat ==
          doctest::Approx((inst.y - inst.A * sol.x_hat).squaredNorm() / (160.0 - nnz)));
    CHECK(r.sigma2_hat > 1e-2 / 3);
    CHECK(r.sigma2_hat < 1e-2 * 3);
  }

  TEST_CASE("scaled residual is undefined once the support fills M") {
    Rng rng(4);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.5), 40, 20, 1e-1, rng);
    CHECK_THROWS_AS(scaled_residual_estimate(inst.A, inst.y, 1e-7), UndefinedEstimate);
  }
}
