#include <cmath>
#include <random>
#include <vector>

#include "armcs/asymptotics.hpp"
#include "armcs/prox.hpp"
#include "doctest.h"

using namespace armcs;

namespace {

// Min over alpha of max over beta of F on a log grid; returns grid indices.
struct GridSaddle {
  double alpha;
  double beta;
  double log_step;
};

GridSaddle grid_saddle(const ScalarProblem& sp, int k, double lo = 1e-6, double hi = 1e2) {
  const double a = std::log(lo), b = std::log(hi), h = (b - a) / (k - 1);
  std::vector<double> pts(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pts[static_cast<std::size_t>(i)] = std::exp(a + i * h);
  double best = kInf, best_alpha = 0.0, best_beta = 0.0;
  for (double al : pts) {
    double inner = -kInf, arg = 0.0;
    for (double be : pts) {
      const double f = evaluate_F(sp, al, be);
      if (f > inner) {
        inner = f;
        arg = be;
      }
    }
    if (inner < best) {
      best = inner;
      best_alpha = al;
      best_beta = arg;
    }
  }
  return {best_alpha, best_beta, h};
}

// E[env] of the prior by direct Monte Carlo, independent of the closed form.
double mc_envelope(const ScalarProblem& sp, double alpha, double beta, int n, double& se) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const double sd = std::sqrt(sp.delta);
  const double gamma = alpha * sp.lambda / (beta * sd);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = 0.0;
    if (u(rng) >= sp.prior.p0()) x = sp.prior.kind() == PriorKind::Bernoulli ? 1.0 : z(rng);
    const double v = l1_envelope(x + alpha / sd * z(rng), gamma);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  se = std::sqrt((s2 / n - mean * mean) / n);
  return mean;
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("closed-form envelope term agrees with direct Monte Carlo for both priors") {
    for (const auto kind : {PriorKind::BernoulliGaussian, PriorKind::Bernoulli}) {
      const ScalarProblem sp{0.7, 1e-2, 0.05, SignalPrior::make(kind, 0.85)};
      for (const auto& [al, be] : {std::pair{0.1, 0.05}, std::pair{0.5, 0.3}, std::pair{2.0, 1.0}}) {
        double se = 0.0;
        const double mc = mc_envelope(sp, al, be, 400000, se);
        CAPTURE(al);
        CAPTURE(be);
        CHECK(std::abs(expected_envelope_term(sp, al, be) - mc) < 4.0 * se);
      }
    }
  }

  TEST_CASE("F is concave in beta and convex in alpha") {
    const ScalarProblem sp{0.8, 1e-3, 0.01, SignalPrior::bernoulli_gaussian(0.9)};
    const SaddlePoint pt = solve_saddle(sp);
    for (double f = 0.2; f <= 5.0; f *= 1.5) {
      const double b = f * pt.beta_star, hb = 1e-3 * b;
      const double d2b = evaluate_F(sp, pt.alpha_star, b + hb) - 2 * evaluate_F(sp, pt.alpha_star, b) +
                         evaluate_F(sp, pt.alpha_star, b - hb);
      CHECK(d2b <= 1e-14);
      const double a = f * pt.alpha_star, ha = 1e-3 * a;
      const double d2a = evaluate_F(sp, a + ha, pt.beta_star) - 2 * evaluate_F(sp, a, pt.beta_star) +
                         evaluate_F(sp, a - ha, pt.beta_star);
      CHECK(d2a >= -1e-14);
    }
  }

  TEST_CASE("saddle lies within one cell of a brute-force grid search") {
    const ScalarProblem problems[] = {
        {0.8, 1e-3, 0.01, SignalPrior::bernoulli_gaussian(0.9)},
        {0.5, 1e-1, 0.1, SignalPrior::bernoulli(0.8)},
        {0.9, 1e-5, 0.005, SignalPrior::bernoulli_gaussian(0.95)},
    };
    for (const auto& sp : problems) {
      const SaddlePoint pt = solve_saddle(sp);
      const GridSaddle g = grid_saddle(sp, 200);
      CHECK(std::abs(std::log(pt.alpha_star / g.alpha)) <= g.log_step * 1.0001);
      CHECK(std::abs(std::log(pt.beta_star / g.beta)) <= g.log_step * 1.0001);
      const Stationarity st = saddle_stationarity(sp, pt);
      CHECK(std::abs(st.d_alpha) < 1e-4);
      CHECK(std::abs(st.d_beta) < 1e-4);
    }
  }

  TEST_CASE("least-squares limit: beta*^2 = sigma2 (delta - 1) for delta > 1 and tiny lambda") {
    for (const double s2 : {1e-3, 1e-1}) {
      const ScalarProblem sp{2.0, s2, 1e-7, SignalPrior::bernoulli_gaussian(0.7)};
      CHECK(asymptotic_residual(sp) == doctest::Approx(s2).epsilon(1e-3));
    }
  }

  TEST_CASE("large lambda: the estimate vanishes and the residual is |y|^2 / N") {
    const double delta = 0.6, s2 = 0.05, p0 = 0.9;
    const ScalarProblem sp{delta, s2, 50.0, SignalPrior::bernoulli_gaussian(p0)};
    CHECK(asymptotic_residual(sp) == doctest::Approx(delta * (1 - p0 + s2)).epsilon(1e-4));
  }

  TEST_CASE("envelope term vanishes as lambda -> 0") {
    ScalarProblem sp{0.8, 1e-2, 1e-9, SignalPrior::bernoulli_gaussian(0.9)};
    CHECK(expected_envelope_term(sp, 0.5, 0.5) < 1e-8);
    sp.lambda = 1e6;
    // Threshold far above the data: envelope -> E[Q^2]/2.
    const double q2 = sp.prior.second_moment() + 0.25 / sp.delta;
    CHECK(expected_envelope_term(sp, 0.5, 0.5) == doctest::Approx(0.5 * q2).epsilon(1e-9));
  }

  TEST_CASE("residual prediction increases with sigma2 and with lambda") {
    double prev = 0.0;
    for (double s2 = 1e-6; s2 < 3.0; s2 *= 4.0) {
      const double r = asymptotic_residual({0.8, s2, 0.01, SignalPrior::bernoulli_gaussian(0.9)});
      CHECK(r > prev);
      prev = r;
    }
    prev = 0.0;
    for (const double lam : {0.005, 0.01, 0.05, 0.1}) {
      const double r = asymptotic_residual({0.8, 1e-3, lam, SignalPrior::bernoulli_gaussian(0.9)});
      CHECK(r > prev);
      prev = r;
    }
  }

  TEST_CASE("Monte Carlo expectation reproduces the closed-form saddle") {
    const ScalarProblem sp{0.8, 1e-2, 0.05, SignalPrior::bernoulli_gaussian(0.9)};
    Rng rng(4);
    const MonteCarloExpectation mc(sp.prior, 200000, rng);
    const auto e = mc.expected_envelope_term(sp, 0.3, 0.2);
    CHECK(std::abs(e.mean - expected_envelope_term(sp, 0.3, 0.2)) < 4.0 * e.std_error);
    const SaddlePoint a = solve_saddle(sp);
    const SaddlePoint b = solve_saddle(sp, mc);
    CHECK(b.predicted_residual() == doctest::Approx(a.predicted_residual()).epsilon(0.02));
    CHECK(b.predicted_objective() == doctest::Approx(a.predicted_objective()).epsilon(0.02));
  }

  TEST_CASE("pinned optimum raises BracketFailure") {
    const ScalarProblem sp{0.8, 1e-2, 0.01, SignalPrior::bernoulli_gaussian(0.9)};
    SaddleOptions tight;
    tight.alpha_lo = 10.0;
    tight.alpha_hi = 20.0;
    tight.max_expansions = 0;
    CHECK_THROWS_AS(solve_saddle(sp, tight), BracketFailure);
    // One expansion rescues a bracket that only slightly misses.
    const SaddlePoint ref = solve_saddle(sp);
    SaddleOptions near;
    near.alpha_lo = ref.alpha_star * 2.0;
    near.alpha_hi = ref.alpha_star * 100.0;
    const SaddlePoint got = solve_saddle(sp, near);
    CHECK(got.alpha_star == doctest::Approx(ref.alpha_star).epsilon(1e-6));
  }

  TEST_CASE("invalid scalar problems are rejected") {
    CHECK_THROWS_AS(solve_saddle({0.0, 1e-3, 0.01, SignalPrior::bernoulli(0.9)}), std::invalid_argument);
    CHECK_THROWS_AS(solve_saddle({0.8, -1e-3, 0.01, SignalPrior::bernoulli(0.9)}), std::invalid_argument);
    CHECK_THROWS_AS(solve_saddle({0.8, 1e-3, 0.0, SignalPrior::bernoulli(0.9)}), std::invalid_argument);
  }
}
