#pragma once

#include <stdexcept>

#include "armcs/admm.hpp"
#include "armcs/problem.hpp"

namespace armcs {

/// Raised when the scaled residual has no degrees of freedom left
/// (support size >= M).
class UndefinedEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScaledResidualResult {
  double sigma2_hat;
  Index support;
  bool converged;
};

/// |y - A x_hat(lambda)|^2 / (M - |x_hat(lambda)|_0). Entries count towards
/// the support when |x_i| > 1e-6 max(1, |x_hat|_inf).
ScaledResidualResult scaled_residual_estimate(const LassoAdmm& solver, const VectorXd& y,
                                              double lambda);
ScaledResidualResult scaled_residual_estimate(const MatrixXd& A, const VectorXd& y,
                                              double lambda, const AdmmOptions& opts = {});

/// |y - A x|^2 / M with the true x; needs ground truth, so only usable as a
/// reference in simulations.
double oracle_ml_estimate(const ProblemInstance& instance);

}  // namespace armcs
