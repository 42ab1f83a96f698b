#include "armcs/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "armcs/prox.hpp"

namespace armcs {

namespace {

void soft_threshold_inplace(VectorXd& v, double gamma) {
  for (Index i = 0; i < v.size(); ++i) v(i) = soft_threshold(v(i), gamma);
}

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Residual balancing: returns the factor rho was multiplied by (1 when unchanged).
double rebalance(double primal, double dual, double& rho) {
  constexpr double kRatio = 2.0;
  constexpr double kMaxStep = 10.0;
  if (!(primal > 0.0 && dual > 0.0)) return 1.0;
  const double r = primal / dual;
  if (r < kRatio && r > 1.0 / kRatio) return 1.0;
  const double f = std::clamp(std::sqrt(r), 1.0 / kMaxStep, kMaxStep);
  rho *= f;
  return f;
}

// ADMM leaves |y - Az|^2 slightly above epsilon. Move z towards the
// least-squares fit on its own support until the residual touches the ball;
// the sparsity pattern is unchanged and the step is of the order of the
// violation. Leaves z alone when that fit is itself outside the ball.
void restore_feasibility(const MatrixXd& A, const VectorXd& y, double epsilon, VectorXd& z) {
  const VectorXd rz = y - A * z;
  if (rz.squaredNorm() <= epsilon) return;
  std::vector<Index> support;
  for (Index i = 0; i < z.size(); ++i)
    if (z(i) != 0.0) support.push_back(i);
  if (support.empty() || support.size() > static_cast<std::size_t>(A.rows())) return;
  MatrixXd As(A.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) As.col(static_cast<Index>(j)) = A.col(support[j]);
  const VectorXd xs = As.colPivHouseholderQr().solve(y);
  const VectorXd d = (y - As * xs) - rz;
  const double a = d.squaredNorm();
  const double b = 2.0 * rz.dot(d);
  const double c = rz.squaredNorm() - epsilon;
  if (!(rz.squaredNorm() + b + a < epsilon) || !(a > 0.0)) return;
  double theta = (-b - std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
  VectorXd cand = z;
  for (int attempt = 0; attempt < 60; ++attempt) {
    theta = std::min(1.0, theta);
    for (std::size_t j = 0; j < support.size(); ++j) {
      const Index i = support[j];
      cand(i) = (1.0 - theta) * z(i) + theta * xs(static_cast<Index>(j));
    }
    if ((y - A * cand).squaredNorm() <= epsilon || theta >= 1.0) break;
    theta = theta * 1.5 + 1e-15;
  }
  if ((y - A * cand).squaredNorm() <= epsilon) z = std::move(cand);
}

}  // namespace

LassoAdmm::LassoAdmm(MatrixXd A, AdmmOptions opts) : A_(std::move(A)), opts_(opts) {
  if (A_.rows() == 0 || A_.cols() == 0) throw std::invalid_argument("ADMM: empty matrix");
  if (!(opts_.rho > 0.0)) throw std::invalid_argument("ADMM: rho must be positive");
  if (!(opts_.tol > 0.0) || opts_.max_iter < 1) {
    throw std::invalid_argument("ADMM: tol and max_iter must be positive");
  }
  wide_ = A_.rows() < A_.cols();
  MatrixXd gram = wide_ ? MatrixXd(A_ * A_.transpose()) : MatrixXd(A_.transpose() * A_);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("ADMM: eigendecomposition failed");
  eig_ = eig.eigenvalues().cwiseMax(0.0);
  basis_ = wide_ ? MatrixXd(A_.transpose() * eig.eigenvectors()) : eig.eigenvectors();
}

VectorXd LassoAdmm::solve_shifted(const VectorXd& b, double shift) const {
  const VectorXd c = basis_.transpose() * b;
  if (wide_) {
    // (A^T A + c I)^{-1} = (I - A^T (A A^T + c I)^{-1} A) / c
    const VectorXd w = c.array() / (eig_.array() + shift);
    return (b - basis_ * w) / shift;
  }
  const VectorXd w = c.array() / (eig_.array() + shift);
  return basis_ * w;
}

RegularizedSolution LassoAdmm::solve_regularized(const VectorXd& y, double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_regularized: lambda must be positive");
  if (y.size() != A_.rows()) throw std::invalid_argument("solve_regularized: size mismatch");

  const Index n = A_.cols();
  double rho = opts_.rho;
  const double stop = opts_.tol * (1.0 + inf_norm(y));
  const VectorXd aty = A_.transpose() * y;
  const int adapt_until = opts_.adaptive_rho ? opts_.max_iter / 2 : 0;

  VectorXd s = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(n);
  VectorXd u = VectorXd::Zero(n);  // scaled dual
  VectorXd z_prev(n);

  RegularizedSolution sol;
  for (int k = 1; k <= opts_.max_iter; ++k) {
    s = solve_shifted(aty + rho * (z - u), rho);
    z_prev = z;
    z = s + u;
    soft_threshold_inplace(z, lambda / rho);
    u += s - z;

    sol.iterations = k;
    const double primal = inf_norm(s - z);
    const double dual = rho * inf_norm(z - z_prev);
    if (primal < stop && dual < stop) {
      sol.converged = true;
      break;
    }
    if (k < adapt_until && k % 5 == 0) u /= rebalance(primal, dual, rho);
  }

  const double n_d = static_cast<double>(n);
  const double rss = (y - A_ * z).squaredNorm();
  sol.residual_per_n = rss / n_d;
  sol.objective_per_n = (0.5 * rss + lambda * z.lpNorm<1>()) / n_d;
  sol.x_hat = std::move(z);
  return sol;
}

ConstrainedSolution LassoAdmm::solve_constrained(const VectorXd& y, double epsilon) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("solve_constrained: epsilon must be positive");
  if (y.size() != A_.rows()) throw std::invalid_argument("solve_constrained: size mismatch");

  // Splitting: s = z (l1 block) and A s = w with |y - w| <= sqrt(epsilon).
  // The s-update solves (A^T A + I) s = (z - u1) + A^T (w - u2) whatever rho is.
  const Index n = A_.cols();
  const Index m = A_.rows();
  double rho = opts_.rho;
  const double radius = std::sqrt(epsilon);
  const double stop = opts_.tol * (1.0 + inf_norm(y));
  const int adapt_until = opts_.adaptive_rho ? opts_.max_iter / 2 : 0;

  VectorXd s = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(n);
  VectorXd u1 = VectorXd::Zero(n);
  VectorXd w = y;
  VectorXd u2 = VectorXd::Zero(m);
  VectorXd As(m), z_prev(n), w_prev(m);

  ConstrainedSolution sol;
  for (int k = 1; k <= opts_.max_iter; ++k) {
    s = solve_shifted((z - u1) + A_.transpose() * (w - u2), 1.0);
    As.noalias() = A_ * s;

    z_prev = z;
    z = s + u1;
    soft_threshold_inplace(z, 1.0 / rho);

    w_prev = w;
    w = As + u2 - y;
    const double dist = w.norm();
    if (dist > radius) w *= radius / dist;
    w += y;

    u1 += s - z;
    u2 += As - w;

    sol.iterations = k;
    const double primal = std::max(inf_norm(s - z), inf_norm(As - w));
    const double dual =
        rho * std::max(inf_norm(z - z_prev), inf_norm(A_.transpose() * (w - w_prev)));
    if (primal < stop && dual < stop) {
      sol.converged = true;
      break;
    }
    if (k < adapt_until && k % 5 == 0) {
      const double f = rebalance(primal, dual, rho);
      u1 /= f;
      u2 /= f;
    }
  }

  restore_feasibility(A_, y, epsilon, z);
  sol.l1_norm = z.lpNorm<1>();
  sol.constraint_slack = epsilon - (y - A_ * z).squaredNorm();
  sol.x_hat_c = std::move(z);
  return sol;
}

RegularizedSolution solve_regularized(const MatrixXd& A, const VectorXd& y, double lambda,
                                      const AdmmOptions& opts) {
  return LassoAdmm(A, opts).solve_regularized(y, lambda);
}

ConstrainedSolution solve_constrained(const MatrixXd& A, const VectorXd& y, double epsilon,
                                      const AdmmOptions& opts) {
  return LassoAdmm(A, opts).solve_constrained(y, epsilon);
}

double regularized_kkt_residual(const MatrixXd& A, const VectorXd& y, const VectorXd& x,
                                double lambda) {
  const VectorXd g = A.transpose() * (y - A * x);
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x(i) != 0.0 ? std::abs(g(i) - lambda * (x(i) > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(i)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

double constrained_kkt_residual(const MatrixXd& A, const VectorXd& y, const VectorXd& x,
                                double epsilon) {
  const VectorXd r = y - A * x;
  if (x.isZero(0.0)) {
    return r.squaredNorm() <= epsilon ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const VectorXd g = A.transpose() * r;
  double t = 0.0;
  Index support = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0.0) continue;
    t += x(i) > 0 ? g(i) : -g(i);
    ++support;
  }
  t /= static_cast<double>(support);
  if (!(t > 0.0)) return std::numeric_limits<double>::infinity();

  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x(i) != 0.0 ? std::abs(g(i) / t - (x(i) > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(i)) / t - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace armcs
