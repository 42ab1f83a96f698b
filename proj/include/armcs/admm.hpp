#pragma once

#include <Eigen/Dense>

namespace armcs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct AdmmOptions {
  /// Initial penalty. With adaptive_rho, every 5 iterations during the first
  /// half of the budget, rho is scaled by sqrt(primal / dual) (clamped to
  /// [0.1, 10]) when the two residuals differ by more than 2x.
  double rho = 1.0;
  bool adaptive_rho = true;
  /// Stop when primal and dual residual inf-norms drop below tol * (1 + |y|_inf).
  double tol = 1e-8;
  int max_iter = 10000;
};

/// Minimizer of 1/2 |y - A s|^2 + lambda |s|_1.
struct RegularizedSolution {
  VectorXd x_hat;
  double residual_per_n = 0.0;   ///< |y - A x_hat|^2 / N
  double objective_per_n = 0.0;  ///< (1/2 |y - A x_hat|^2 + lambda |x_hat|_1) / N
  int iterations = 0;
  bool converged = false;
};

/// Minimizer of |s|_1 subject to |y - A s|^2 <= epsilon.
struct ConstrainedSolution {
  VectorXd x_hat_c;
  double l1_norm = 0.0;
  double constraint_slack = 0.0;  ///< epsilon - |y - A x_hat_c|^2
  int iterations = 0;
  bool converged = false;
};

/// ADMM solvers for the l1-regularized and l1-constrained problems on a fixed
/// measurement matrix. An eigendecomposition of the smaller Gram matrix (A A^T
/// or A^T A) is computed once, so (A^T A + c I) s = b is solved for any shift c
/// without refactoring: across iterations, rho updates, lambdas and epsilons.
/// Solves are const and reentrant.
class LassoAdmm {
 public:
  explicit LassoAdmm(MatrixXd A, AdmmOptions opts = {});

  const MatrixXd& matrix() const { return A_; }
  const AdmmOptions& options() const { return opts_; }

  RegularizedSolution solve_regularized(const VectorXd& y, double lambda) const;
  ConstrainedSolution solve_constrained(const VectorXd& y, double epsilon) const;

 private:
  VectorXd solve_shifted(const VectorXd& b, double shift) const;

  MatrixXd A_;
  AdmmOptions opts_;
  // Wide (M < N): basis_ = A^T U for A A^T = U diag(eig_) U^T, Woodbury form.
  // Tall: basis_ = V for A^T A = V diag(eig_) V^T.
  bool wide_ = false;
  MatrixXd basis_;
  VectorXd eig_;
};

RegularizedSolution solve_regularized(const MatrixXd& A, const VectorXd& y, double lambda,
                                      const AdmmOptions& opts = {});
ConstrainedSolution solve_constrained(const MatrixXd& A, const VectorXd& y, double epsilon,
                                      const AdmmOptions& opts = {});

/// Inf-norm violation of the optimality conditions of the regularized problem:
/// A^T (y - A x) must equal lambda sign(x_i) on the support and be bounded by
/// lambda elsewhere.
double regularized_kkt_residual(const MatrixXd& A, const VectorXd& y, const VectorXd& x,
                                double lambda);

/// Stationarity violation of the constrained problem at x (scale free). With
/// g = A^T (y - A x) the conditions are g_i = t sign(x_i) on the support and
/// |g_i| <= t elsewhere for a common t > 0; t is fitted from the support.
/// Returns 0 when x = 0 is feasible.
double constrained_kkt_residual(const MatrixXd& A, const VectorXd& y, const VectorXd& x,
                                double epsilon);

}  // namespace armcs
