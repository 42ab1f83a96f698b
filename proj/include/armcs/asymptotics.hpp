#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "armcs/problem.hpp"

namespace armcs {

/// Parameters of the scalar min-max problem that predicts the large-system
/// behaviour of the l1-regularized estimator.
struct ScalarProblem {
  double delta = 0.8;   ///< measurement ratio M/N
  double sigma2 = 0.0;  ///< candidate noise variance
  double lambda = 0.01;
  SignalPrior prior = SignalPrior::bernoulli_gaussian(0.9);

  void validate() const;
};

struct SaddleOptions {
  double alpha_lo = 1e-6;
  double alpha_hi = 1e2;
  double beta_lo = 1e-6;
  double beta_hi = 1e2;
  /// Golden-section termination: bracket width in log-space.
  double tol_search = 1e-8;
  /// Number of 10x bracket expansions allowed when an optimum pins a boundary.
  int max_expansions = 1;
};

struct SaddlePoint {
  double alpha_star = 0.0;
  double beta_star = 0.0;
  double f_value = 0.0;

  /// Asymptotic |y - A x_hat|^2 / N.
  double predicted_residual() const { return beta_star * beta_star; }
  /// Asymptotic (1/2 |y - A x_hat|^2 + lambda |x_hat|_1) / N.
  double predicted_objective() const { return f_value; }
};

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// E[ env_{gamma|.|}(X + (alpha/sqrt(delta)) G) ] with
/// gamma = alpha lambda / (beta sqrt(delta)), X ~ prior, G ~ N(0,1).
double expected_envelope_term(const ScalarProblem& sp, double alpha, double beta);

/// F(alpha, beta) = alpha beta sqrt(D)/2 + sigma2 beta sqrt(D)/(2 alpha) - beta^2/2
///                  - alpha beta/(2 sqrt(D)) + (beta sqrt(D)/alpha) E[env]
double evaluate_F(const ScalarProblem& sp, double alpha, double beta);

/// Sample-average replacement for the closed-form expectation. Draws are fixed
/// at construction (with antithetic G), so the resulting F is deterministic and
/// smooth enough for the same golden-section search.
class MonteCarloExpectation {
 public:
  struct Estimate {
    double mean;
    double std_error;
  };

  MonteCarloExpectation(const SignalPrior& prior, std::size_t pairs, Rng& rng);

  Estimate expected_envelope_term(const ScalarProblem& sp, double alpha, double beta) const;
  double evaluate_F(const ScalarProblem& sp, double alpha, double beta) const;

 private:
  std::vector<double> x_;
  std::vector<double> g_;
};

/// min over alpha > 0 of max over beta > 0 of F, by nested golden-section
/// search in log-space (outer minimization over alpha, inner maximization over
/// beta). Throws BracketFailure if an optimum still sits on a bracket end
/// after the allowed expansions.
SaddlePoint solve_saddle(const ScalarProblem& sp, const SaddleOptions& opts = {});
SaddlePoint solve_saddle(const ScalarProblem& sp, const MonteCarloExpectation& mc,
                         const SaddleOptions& opts = {});

/// beta*^2, the predicted residual per N.
double asymptotic_residual(const ScalarProblem& sp, const SaddleOptions& opts = {});

/// Central finite-difference gradient of F in log(alpha) and log(beta),
/// divided by beta^2. Both components vanish at the saddle.
struct Stationarity {
  double d_alpha;
  double d_beta;
};
Stationarity saddle_stationarity(const ScalarProblem& sp, const SaddlePoint& point,
                                 double log_step = 1e-4);

}  // namespace armcs
