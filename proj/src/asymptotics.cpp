#include "armcs/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "armcs/golden.hpp"
#include "armcs/prox.hpp"

namespace armcs {

namespace {

struct FParts {
  double sqrt_delta;
  double gamma;  // envelope threshold
  double scale;  // standard deviation of the Gaussian part, alpha / sqrt(delta)
};

FParts f_parts(const ScalarProblem& sp, double alpha, double beta) {
  const double sd = std::sqrt(sp.delta);
  return {sd, alpha * sp.lambda / (beta * sd), alpha / sd};
}

// Assembles F from a given value of the envelope expectation.
double assemble_F(const ScalarProblem& sp, double alpha, double beta, double expectation) {
  const double sd = std::sqrt(sp.delta);
  return 0.5 * alpha * beta * sd + 0.5 * sp.sigma2 * beta * sd / alpha - 0.5 * beta * beta -
         0.5 * alpha * beta / sd + (beta * sd / alpha) * expectation;
}

template <typename Objective>
SaddlePoint nested_search(Objective&& F, const SaddleOptions& opts, const ScalarProblem& sp) {
  SaddleOptions br = opts;
  for (int attempt = 0;; ++attempt) {
    double beta_at_best = 0.0;
    auto inner = [&](double alpha) {
      return golden_maximize_log([&](double beta) { return F(alpha, beta); }, br.beta_lo,
                                 br.beta_hi, br.tol_search);
    };
    const GoldenResult outer = golden_minimize_log(
        [&](double alpha) { return inner(alpha).value; }, br.alpha_lo, br.alpha_hi,
        br.tol_search);
    const GoldenResult best_beta = inner(outer.x);
    beta_at_best = best_beta.x;

    const double edge = 10.0 * br.tol_search;
    const bool a_lo = std::log(outer.x) - std::log(br.alpha_lo) < edge;
    const bool a_hi = std::log(br.alpha_hi) - std::log(outer.x) < edge;
    const bool b_lo = std::log(beta_at_best) - std::log(br.beta_lo) < edge;
    const bool b_hi = std::log(br.beta_hi) - std::log(beta_at_best) < edge;
    if (!(a_lo || a_hi || b_lo || b_hi)) {
      return SaddlePoint{outer.x, beta_at_best, best_beta.value};
    }
    if (attempt >= opts.max_expansions) {
      std::ostringstream msg;
      msg << "saddle search pinned to bracket boundary (alpha=" << outer.x
          << ", beta=" << beta_at_best << ") for delta=" << sp.delta << " sigma2=" << sp.sigma2
          << " lambda=" << sp.lambda << " p0=" << sp.prior.p0();
      throw BracketFailure(msg.str());
    }
    if (a_lo) br.alpha_lo /= 10.0;
    if (a_hi) br.alpha_hi *= 10.0;
    if (b_lo) br.beta_lo /= 10.0;
    if (b_hi) br.beta_hi *= 10.0;
  }
}

}  // namespace

void ScalarProblem::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("ScalarProblem: delta must be positive");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("ScalarProblem: sigma2 must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("ScalarProblem: lambda must be positive");
}

double expected_envelope_term(const ScalarProblem& sp, double alpha, double beta) {
  const FParts f = f_parts(sp, alpha, beta);
  const double p0 = sp.prior.p0();
  const double zero_part = expected_l1_envelope_gaussian(f.gamma, 0.0, f.scale);
  if (p0 == 1.0) return zero_part;
  double nonzero_part = 0.0;
  switch (sp.prior.kind()) {
    case PriorKind::BernoulliGaussian:
      // X + scale G is N(0, 1 + scale^2) when X is standard Gaussian.
      nonzero_part = expected_l1_envelope_gaussian(f.gamma, 0.0, std::sqrt(1.0 + f.scale * f.scale));
      break;
    case PriorKind::Bernoulli:
      nonzero_part = expected_l1_envelope_gaussian(f.gamma, 1.0, f.scale);
      break;
  }
  return p0 * zero_part + (1.0 - p0) * nonzero_part;
}

double evaluate_F(const ScalarProblem& sp, double alpha, double beta) {
  return assemble_F(sp, alpha, beta, expected_envelope_term(sp, alpha, beta));
}

MonteCarloExpectation::MonteCarloExpectation(const SignalPrior& prior, std::size_t pairs,
                                             Rng& rng) {
  if (pairs == 0) throw std::invalid_argument("MonteCarloExpectation: need at least one sample");
  x_.resize(pairs);
  g_.resize(pairs);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < pairs; ++i) {
    x_[i] = prior.sample(rng);
    g_[i] = gauss(rng);
  }
}

MonteCarloExpectation::Estimate MonteCarloExpectation::expected_envelope_term(
    const ScalarProblem& sp, double alpha, double beta) const {
  const FParts f = f_parts(sp, alpha, beta);
  // Pair averages are i.i.d., which gives an honest standard error.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double pair = 0.5 * (l1_envelope(x_[i] + f.scale * g_[i], f.gamma) +
                               l1_envelope(x_[i] - f.scale * g_[i], f.gamma));
    sum += pair;
    sum_sq += pair * pair;
  }
  const double n = static_cast<double>(x_.size());
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double MonteCarloExpectation::evaluate_F(const ScalarProblem& sp, double alpha,
                                         double beta) const {
  return assemble_F(sp, alpha, beta, expected_envelope_term(sp, alpha, beta).mean);
}

SaddlePoint solve_saddle(const ScalarProblem& sp, const SaddleOptions& opts) {
  sp.validate();
  return nested_search([&](double a, double b) { return evaluate_F(sp, a, b); }, opts, sp);
}

SaddlePoint solve_saddle(const ScalarProblem& sp, const MonteCarloExpectation& mc,
                         const SaddleOptions& opts) {
  sp.validate();
  return nested_search([&](double a, double b) { return mc.evaluate_F(sp, a, b); }, opts, sp);
}

double asymptotic_residual(const ScalarProblem& sp, const SaddleOptions& opts) {
  return solve_saddle(sp, opts).predicted_residual();
}

Stationarity saddle_stationarity(const ScalarProblem& sp, const SaddlePoint& point,
                                 double log_step) {
  const double a = point.alpha_star;
  const double b = point.beta_star;
  const double up = std::exp(log_step);
  const double dn = std::exp(-log_step);
  const double scale = b * b;
  const double da = (evaluate_F(sp, a * up, b) - evaluate_F(sp, a * dn, b)) / (2.0 * log_step);
  const double db = (evaluate_F(sp, a, b * up) - evaluate_F(sp, a, b * dn)) / (2.0 * log_step);
  return {da / scale, db / scale};
}

}  // namespace armcs
