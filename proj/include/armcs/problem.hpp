#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace armcs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Seeded generator injected into every sampling routine. There is no global
/// RNG state anywhere in the library.
using Rng = std::mt19937_64;

enum class PriorKind { BernoulliGaussian, Bernoulli };

std::string_view to_string(PriorKind kind);
PriorKind parse_prior_kind(std::string_view name);

/// Law of the entries of the unknown vector: zero with probability p0,
/// otherwise N(0,1) (Bernoulli-Gaussian) or exactly 1 (Bernoulli). The nonzero
/// part has unit second moment in both cases.
class SignalPrior {
 public:
  static SignalPrior bernoulli_gaussian(double p0);
  static SignalPrior bernoulli(double p0);
  static SignalPrior make(PriorKind kind, double p0);

  PriorKind kind() const { return kind_; }
  double p0() const { return p0_; }

  /// E[X^2] = 1 - p0 for both variants.
  double second_moment() const { return 1.0 - p0_; }

  double sample(Rng& rng) const;

 private:
  SignalPrior(PriorKind kind, double p0);

  PriorKind kind_;
  double p0_;
};

VectorXd sample_signal(const SignalPrior& prior, Index n, Rng& rng);

/// One realization of y = A x + v. A has i.i.d. N(0, 1/n) entries.
struct ProblemInstance {
  MatrixXd A;
  VectorXd x;
  VectorXd v;
  VectorXd y;
  double sigma2_v = 0.0;

  Index n() const { return A.cols(); }
  Index m() const { return A.rows(); }
  double delta() const { return static_cast<double>(m()) / static_cast<double>(n()); }
};

ProblemInstance generate_instance(const SignalPrior& prior, Index n, Index m, double sigma2_v,
                                  Rng& rng);

/// Per-trial generator: seed = base_seed + trial_index.
inline Rng trial_rng(std::uint64_t base_seed, std::uint64_t trial_index) {
  return Rng(base_seed + trial_index);
}

}  // namespace armcs
