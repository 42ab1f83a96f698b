#include "armcs/arm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace armcs {

void ArmConfig::validate() const {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("ArmConfig: lambda1 must be positive");
  if (lambda_set.empty()) throw std::invalid_argument("ArmConfig: empty lambda set");
  if (reset_thresholds.size() + 1 != lambda_set.size()) {
    throw std::invalid_argument("ArmConfig: need exactly one threshold fewer than lambda candidates");
  }
  for (std::size_t i = 1; i < reset_thresholds.size(); ++i) {
    if (!(reset_thresholds[i] < reset_thresholds[i - 1])) {
      throw std::invalid_argument("ArmConfig: reset thresholds must be strictly decreasing");
    }
  }
  if (known_p0 && !(*known_p0 >= 0.0 && *known_p0 < 1.0)) {
    throw std::invalid_argument("ArmConfig: known p0 outside [0,1)");
  }
}

double estimate_p0(const VectorXd& y, double p0_lo, double p0_hi) {
  if (y.size() < 1) throw std::invalid_argument("estimate_p0: empty measurement");
  const double raw = 1.0 - y.squaredNorm() / static_cast<double>(y.size());
  return std::clamp(raw, p0_lo, p0_hi);
}

double estimate_p0(const VectorXd& y, const ResidualTable& table) {
  return estimate_p0(y, table.p0_min(), table.p0_max());
}

double match_sigma2(double res, double p0_hat, double lambda, const ResidualTable& table) {
  if (!(res >= 0.0)) throw std::invalid_argument("match_sigma2: residual must be >= 0");
  const std::size_t li = table.lambda_index(lambda);
  const std::size_t pi = table.nearest_p0_index(std::clamp(p0_hat, table.p0_min(), table.p0_max()));
  const std::vector<double> curve = table.curve(li, pi);
  const auto& grid = table.sigma2_grid();

  if (res <= curve.front()) return grid.front();
  if (res >= curve.back()) return grid.back();

  // The curve is strictly increasing, so bisect for the bracketing segment and
  // invert the log-log interpolant there.
  std::size_t lo = 0;
  std::size_t hi = curve.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (curve[mid] <= res) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = (std::log(res) - std::log(curve[lo])) / (std::log(curve[hi]) - std::log(curve[lo]));
  return std::exp(std::log(grid[lo]) + t * (std::log(grid[hi]) - std::log(grid[lo])));
}

double select_lambda2(double sigma2_tentative, const ArmConfig& cfg) {
  for (std::size_t i = 0; i < cfg.reset_thresholds.size(); ++i) {
    if (sigma2_tentative >= cfg.reset_thresholds[i]) return cfg.lambda_set[i];
  }
  return cfg.lambda_set.back();
}

EstimationReport arm_estimate(const LassoAdmm& solver, const VectorXd& y, const ArmConfig& cfg,
                              const ResidualTable& table) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const MatrixXd& A = solver.matrix();
  const double delta = static_cast<double>(A.rows()) / static_cast<double>(A.cols());
  if (std::abs(delta - table.delta()) > 1e-6) {
    throw std::invalid_argument("arm_estimate: table delta does not match M/N of the instance");
  }

  EstimationReport rep;
  rep.p0_used = cfg.known_p0 ? std::clamp(*cfg.known_p0, table.p0_min(), table.p0_max())
                             : estimate_p0(y, table);
  rep.lambda1 = cfg.lambda1;

  const RegularizedSolution first = solver.solve_regularized(y, cfg.lambda1);
  rep.res1 = first.residual_per_n;
  rep.iterations1 = first.iterations;
  rep.converged = first.converged;
  rep.sigma2_tentative = match_sigma2(rep.res1, rep.p0_used, cfg.lambda1, table);

  rep.lambda2 = select_lambda2(rep.sigma2_tentative, cfg);
  if (std::abs(rep.lambda2 - rep.lambda1) <= 1e-12 * rep.lambda1) {
    rep.res2 = rep.res1;
    rep.sigma2_hat = rep.sigma2_tentative;
  } else {
    const RegularizedSolution second = solver.solve_regularized(y, rep.lambda2);
    rep.second_solve = true;
    rep.res2 = second.residual_per_n;
    rep.iterations2 = second.iterations;
    rep.converged = rep.converged && second.converged;
    rep.sigma2_hat = match_sigma2(rep.res2, rep.p0_used, rep.lambda2, table);
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

EstimationReport arm_estimate(const MatrixXd& A, const VectorXd& y, const ArmConfig& cfg,
                              const ResidualTable& table) {
  return arm_estimate(LassoAdmm(A, cfg.solver), y, cfg, table);
}

}  // namespace armcs
