#pragma once

#include <optional>
#include <vector>

#include "armcs/admm.hpp"
#include "armcs/residual_table.hpp"

namespace armcs {

struct ArmConfig {
  double lambda1 = 0.01;
  /// Candidates for the reset, largest first.
  std::vector<double> lambda_set{0.1, 0.05, 0.01, 0.005};
  /// Breakpoints on the tentative estimate, strictly decreasing; one fewer
  /// than lambda_set.
  std::vector<double> reset_thresholds{1e-2, 1e-3, 1e-4};
  /// Sparsity handed to the matcher; estimated from y when empty.
  std::optional<double> known_p0;
  AdmmOptions solver;

  void validate() const;
};

struct EstimationReport {
  double sigma2_hat = 0.0;
  double sigma2_tentative = 0.0;
  double p0_used = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double res1 = 0.0;  ///< Res(lambda1) = |y - A x_hat|^2 / N
  double res2 = 0.0;  ///< Res(lambda2); equals res1 when no second solve ran
  int iterations1 = 0;
  int iterations2 = 0;
  bool converged = true;  ///< every ADMM solve met its tolerance
  bool second_solve = false;
  double wall_seconds = 0.0;
};

/// 1 - |y|^2 / M, clamped to [p0_lo, p0_hi].
double estimate_p0(const VectorXd& y, double p0_lo, double p0_hi);
/// Same, clamped to the table's p0 range.
double estimate_p0(const VectorXd& y, const ResidualTable& table);

/// sigma2 on the tabulated curve for (p0_hat, lambda) whose residual equals
/// res. Returns the grid minimum when res is below the curve and the grid
/// maximum when above it.
double match_sigma2(double res, double p0_hat, double lambda, const ResidualTable& table);

double select_lambda2(double sigma2_tentative, const ArmConfig& cfg);

/// Asymptotic residual matching with one parameter reset. The table must
/// cover lambda1 and every candidate in cfg.lambda_set at the instance's M/N.
EstimationReport arm_estimate(const LassoAdmm& solver, const VectorXd& y, const ArmConfig& cfg,
                              const ResidualTable& table);
EstimationReport arm_estimate(const MatrixXd& A, const VectorXd& y, const ArmConfig& cfg,
                              const ResidualTable& table);

}  // namespace armcs
