#include <cmath>

#include "armcs/problem.hpp"
#include "doctest.h"

using namespace armcs;

TEST_SUITE("problem") {
  TEST_CASE("prior names round-trip and accept aliases") {
    CHECK(parse_prior_kind("bernoulli_gaussian") == PriorKind::BernoulliGaussian);
    CHECK(parse_prior_kind("bg") == PriorKind::BernoulliGaussian);
    CHECK(parse_prior_kind("bernoulli") == PriorKind::Bernoulli);
    CHECK(parse_prior_kind("binary") == PriorKind::Bernoulli);
    CHECK(parse_prior_kind(to_string(PriorKind::Bernoulli)) == PriorKind::Bernoulli);
    CHECK_THROWS_AS(parse_prior_kind("laplace"), std::invalid_argument);
  }

  TEST_CASE("p0 outside [0,1) is rejected") {
    CHECK_THROWS_AS(SignalPrior::bernoulli_gaussian(1.0), std::invalid_argument);
    CHECK_THROWS_AS(SignalPrior::bernoulli(-0.01), std::invalid_argument);
    CHECK_NOTHROW(SignalPrior::bernoulli(0.0));
  }

  TEST_CASE("sample moments match the prior") {
    // Zero fraction and second moment within 5 standard errors.
    const int n = 200000;
    for (const auto kind : {PriorKind::BernoulliGaussian, PriorKind::Bernoulli}) {
      for (const double p0 : {0.5, 0.9}) {
        const SignalPrior prior = SignalPrior::make(kind, p0);
        Rng rng(7);
        const VectorXd x = sample_signal(prior, n, rng);
        const double zeros = static_cast<double>((x.array() == 0.0).count()) / n;
        CHECK(std::abs(zeros - p0) < 5.0 * std::sqrt(p0 * (1 - p0) / n));
        const double m2 = x.squaredNorm() / n;
        // Var(X^2) = E X^4 - (E X^2)^2 with E X^4 = 3(1-p0) or (1-p0).
        const double e4 = (kind == PriorKind::BernoulliGaussian ? 3.0 : 1.0) * (1 - p0);
        const double se = std::sqrt((e4 - (1 - p0) * (1 - p0)) / n);
        CHECK(std::abs(m2 - prior.second_moment()) < 5.0 * se);
        if (kind == PriorKind::Bernoulli) {
          CHECK(((x.array() == 0.0) || (x.array() == 1.0)).all());
        }
      }
    }
  }

  TEST_CASE("instances satisfy y = A x + v with N(0, 1/N) entries") {
    Rng rng(3);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.9), 300, 200, 0.01, rng);
    CHECK(inst.n() == 300);
    CHECK(inst.m() == 200);
    CHECK(inst.delta() == doctest::Approx(200.0 / 300.0));
    CHECK((inst.y - inst.A * inst.x - inst.v).norm() < 1e-12);
    const double var_a = inst.A.squaredNorm() / static_cast<double>(inst.A.size());
    CHECK(var_a == doctest::Approx(1.0 / 300).epsilon(0.02));
    const double var_v = inst.v.squaredNorm() / 200.0;
    CHECK(var_v == doctest::Approx(0.01).epsilon(0.35));
  }

  TEST_CASE("same seed reproduces the instance; noise scales with sigma2") {
    const SignalPrior prior = SignalPrior::bernoulli(0.8);
    Rng r1 = trial_rng(42, 5);
    Rng r2 = trial_rng(42, 5);
    Rng r3 = trial_rng(42, 5);
    const auto a = generate_instance(prior, 50, 40, 1e-2, r1);
    const auto b = generate_instance(prior, 50, 40, 1e-2, r2);
    const auto c = generate_instance(prior, 50, 40, 1e-4, r3);
    CHECK(a.A == b.A);
    CHECK(a.y == b.y);
    CHECK(a.A == c.A);
    CHECK(a.x == c.x);
    CHECK((a.v - 10.0 * c.v).norm() < 1e-14 * a.v.norm());

    Rng other = trial_rng(42, 6);
    CHECK(generate_instance(prior, 50, 40, 1e-2, other).A != a.A);
  }

  TEST_CASE("noiseless instances and invalid sizes") {
    Rng rng(1);
    const auto inst = generate_instance(SignalPrior::bernoulli_gaussian(0.5), 20, 10, 0.0, rng);
    CHECK(inst.v.isZero(0.0));
    CHECK_THROWS_AS(generate_instance(SignalPrior::bernoulli(0.5), 20, 10, -1e-3, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_instance(SignalPrior::bernoulli(0.5), 0, 10, 1e-3, rng),
                    std::invalid_argument);
  }
}
