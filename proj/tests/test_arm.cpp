#include <cmath>

#include "armcs/arm.hpp"
#include "doctest.h"

using namespace armcs;

namespace {

const ResidualTable& table08() {
  static const ResidualTable t = [] {
    TableConfig c = TableConfig::standard(PriorKind::BernoulliGaussian, 0.8);
    c.p0_grid = {0.95, 0.9, 0.85};
    return build_table(c);
  }();
  return t;
}

}  // namespace

TEST_SUITE("arm") {
  TEST_CASE("p0 estimate from the measurement energy, clamped") {
    VectorXd y = VectorXd::Constant(100, std::sqrt(0.1));  // |y|^2 / M = 0.1
    CHECK(estimate_p0(y, 0.5, 0.99) == doctest::Approx(0.9));
    CHECK(estimate_p0(VectorXd::Zero(10), 0.5, 0.99) == 0.99);
    CHECK(estimate_p0(VectorXd::Constant(10, 2.0), 0.5, 0.99) == 0.5);
    CHECK(estimate_p0(y, table08()) == doctest::Approx(0.9));
    CHECK_THROWS_AS(estimate_p0(VectorXd(), 0.5, 0.99), std::invalid_argument);
  }

  TEST_CASE("matching clamps to the grid ends") {
    const ResidualTable& t = table08();
    const std::size_t li = t.lambda_index(0.01);
    const auto curve = t.curve(li, t.nearest_p0_index(0.9));
    CHECK(match_sigma2(0.0, 0.9, 0.01, t) == t.sigma2_min());
    CHECK(match_sigma2(0.5 * curve.front(), 0.9, 0.01, t) == t.sigma2_min());
    CHECK(match_sigma2(2.0 * curve.back(), 0.9, 0.01, t) == t.sigma2_max());
    // p0 beyond the grid is clamped rather than rejected.
    CHECK_NOTHROW(match_sigma2(curve[10], 0.3, 0.01, t));
    CHECK_THROWS_AS(match_sigma2(curve[10], 0.9, 0.02, t), TableRangeError);
    CHECK_THROWS_AS(match_sigma2(-1.0, 0.9, 0.01, t), std::invalid_argument);
  }

  TEST_CASE("matching inverts the interpolated curve") {
    const ResidualTable& t = table08();
    for (const double lam : t.lambda_set()) {
      double prev = 0.0;
      for (double s2 = 1.1e-6; s2 < 3.0; s2 *= 1.7) {
        const double res = lookup_residual(t, s2, 0.9, lam);
        const double back = match_sigma2(res, 0.9, lam, t);
        CHECK(back == doctest::Approx(s2).epsilon(1e-9));
        CHECK(back > prev);
        prev = back;
      }
    }
  }

  TEST_CASE("matching recovers sigma2 from the exact prediction within 3%") {
    const ResidualTable& t = table08();
    for (double s2 = 1e-5; s2 <= 1e-1; s2 *= 2.3) {
      const double res =
          asymptotic_residual({0.8, s2, 0.01, SignalPrior::bernoulli_gaussian(0.9)});
      CHECK(match_sigma2(res, 0.9, 0.01, t) == doctest::Approx(s2).epsilon(0.03));
    }
  }

  TEST_CASE("lambda reset thresholds") {
    const ArmConfig cfg;
    CHECK(select_lambda2(0.5, cfg) == 0.1);
    CHECK(select_lambda2(1e-2, cfg) == 0.1);
    CHECK(select_lambda2(9.99e-3, cfg) == 0.05);
    CHECK(select_lambda2(1e-3, cfg) == 0.05);
    CHECK(select_lambda2(9.99e-4, cfg) == 0.01);
    CHECK(select_lambda2(1e-4, cfg) == 0.01);
    CHECK(select_lambda2(9.99e-5, cfg) == 0.005);
    CHECK(select_lambda2(1e-6, cfg) == 0.005);
  }

  TEST_CASE("config validation") {
    ArmConfig c;
    c.reset_thresholds = {1e-3, 1e-2, 1e-4};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ArmConfig{};
    c.lambda_set.pop_back();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ArmConfig{};
    c.known_p0 = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("estimates on simulated data") {
    const ResidualTable& t = table08();
    const ArmConfig cfg;
    for (const double s2 : {1e-4, 1e-3, 1e-2}) {
      Rng rng(21);
      const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 500, 400, s2, rng);
      const EstimationReport r = arm_estimate(inst.A, inst.y, cfg, t);
      CAPTURE(s2);
      CHECK(r.converged);
      CHECK(r.sigma2_hat > s2 / 2);
      CHECK(r.sigma2_hat < s2 * 2);
      CHECK(r.lambda2 == select_lambda2(r.sigma2_tentative, cfg));
      CHECK(r.second_solve == (r.lambda2 != r.lambda1));
      if (!r.second_solve) {
        CHECK(r.sigma2_hat == r.sigma2_tentative);
        CHECK(r.iterations2 == 0);
      }
    }
  }

  TEST_CASE("noiseless data lands at the bottom of the grid") {
    Rng rng(22);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 500, 400, 0.0, rng);
    const EstimationReport r = arm_estimate(inst.A, inst.y, ArmConfig{}, table08());
    CHECK(r.sigma2_hat >= table08().sigma2_min());
    CHECK(r.sigma2_hat < 1e-5);
  }

  TEST_CASE("deterministic and consistent with a shared solver") {
    Rng rng(23);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 200, 160, 1e-3, rng);
    ArmConfig cfg;
    cfg.known_p0 = 0.9;
    const EstimationReport a = arm_estimate(inst.A, inst.y, cfg, table08());
    const EstimationReport b = arm_estimate(LassoAdmm(inst.A, cfg.solver), inst.y, cfg, table08());
    CHECK(a.sigma2_hat == b.sigma2_hat);
    CHECK(a.res1 == b.res1);
    CHECK(a.p0_used == 0.9);
  }

  TEST_CASE("table delta must match the instance") {
    Rng rng(24);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 100, 50, 1e-3, rng);
    CHECK_THROWS_AS(arm_estimate(inst.A, inst.y, ArmConfig{}, table08()), std::invalid_argument);
  }
}
