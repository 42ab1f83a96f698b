#pragma once

// Independent reference solvers shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double lasso_objective(const MatrixXd& A, const VectorXd& y, const VectorXd& x,
                              double lambda) {
  return 0.5 * (y - A * x).squaredNorm() + lambda * x.lpNorm<1>();
}

// Projected gradient on min 1/2 |y - A(p - q)|^2 + lambda 1'(p + q), p, q >= 0,
// then an exact solve of the optimality system on the detected support.
inline VectorXd lasso_slow(const MatrixXd& A, const VectorXd& y, double lambda,
                           int iters = 200000) {
  const long n = A.cols();
  const double lip = 2.0 * A.operatorNorm() * A.operatorNorm();
  const double step = 1.0 / lip;
  VectorXd p = VectorXd::Zero(n), q = VectorXd::Zero(n);
  for (int k = 0; k < iters; ++k) {
    const VectorXd g = A.transpose() * (A * (p - q) - y);
    p = (p - step * (g.array() + lambda).matrix()).cwiseMax(0.0);
    q = (q - step * (-g.array() + lambda).matrix()).cwiseMax(0.0);
  }
  VectorXd x = p - q;

  // Polish: x_S = (A_S' A_S)^{-1} (A_S' y - lambda sign(x_S)).
  std::vector<long> support;
  for (long i = 0; i < n; ++i)
    if (std::abs(x(i)) > 1e-9) support.push_back(i);
  if (support.empty()) return VectorXd::Zero(n);
  MatrixXd As(A.rows(), static_cast<long>(support.size()));
  VectorXd sg(static_cast<long>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    As.col(static_cast<long>(j)) = A.col(support[j]);
    sg(static_cast<long>(j)) = x(support[j]) > 0 ? 1.0 : -1.0;
  }
  const VectorXd xs =
      (As.transpose() * As).ldlt().solve(As.transpose() * y - lambda * sg);
  VectorXd polished = VectorXd::Zero(n);
  bool signs_ok = true;
  for (std::size_t j = 0; j < support.size(); ++j) {
    polished(support[j]) = xs(static_cast<long>(j));
    signs_ok = signs_ok && xs(static_cast<long>(j)) * sg(static_cast<long>(j)) > 0;
  }
  if (signs_ok && lasso_objective(A, y, polished, lambda) <= lasso_objective(A, y, x, lambda)) {
    return polished;
  }
  return x;
}

}  // namespace oracle
