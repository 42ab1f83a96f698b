#include "armcs/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace armcs {

ScaledResidualResult scaled_residual_estimate(const LassoAdmm& solver, const VectorXd& y,
                                              double lambda) {
  const RegularizedSolution sol = solver.solve_regularized(y, lambda);
  const MatrixXd& A = solver.matrix();
  const double cutoff =
      1e-6 * std::max(1.0, sol.x_hat.size() ? sol.x_hat.lpNorm<Eigen::Infinity>() : 0.0);
  const Index support = (sol.x_hat.array().abs() > cutoff).count();
  const Index dof = A.rows() - support;
  if (dof <= 0) {
    throw UndefinedEstimate("scaled residual undefined: support size " + std::to_string(support) +
                            " >= M");
  }
  const double rss = (y - A * sol.x_hat).squaredNorm();
  return {rss / static_cast<double>(dof), support, sol.converged};
}

ScaledResidualResult scaled_residual_estimate(const MatrixXd& A, const VectorXd& y,
                                              double lambda, const AdmmOptions& opts) {
  return scaled_residual_estimate(LassoAdmm(A, opts), y, lambda);
}

double oracle_ml_estimate(const ProblemInstance& instance) {
  return (instance.y - instance.A * instance.x).squaredNorm() / static_cast<double>(instance.m());
}

}  // namespace armcs
