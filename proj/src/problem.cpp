#include "armcs/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace armcs {

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::BernoulliGaussian:
      return "bernoulli_gaussian";
    case PriorKind::Bernoulli:
      return "bernoulli";
  }
  return "unknown";
}

PriorKind parse_prior_kind(std::string_view name) {
  if (name == "bernoulli_gaussian" || name == "bg") return PriorKind::BernoulliGaussian;
  if (name == "bernoulli" || name == "binary") return PriorKind::Bernoulli;
  throw std::invalid_argument("unknown prior '" + std::string(name) + "'");
}

SignalPrior::SignalPrior(PriorKind kind, double p0) : kind_(kind), p0_(p0) {
  if (!(p0 >= 0.0 && p0 < 1.0)) {
    throw std::invalid_argument("prior p0 must lie in [0, 1)");
  }
}

SignalPrior SignalPrior::bernoulli_gaussian(double p0) {
  return SignalPrior(PriorKind::BernoulliGaussian, p0);
}

SignalPrior SignalPrior::bernoulli(double p0) { return SignalPrior(PriorKind::Bernoulli, p0); }

SignalPrior SignalPrior::make(PriorKind kind, double p0) { return SignalPrior(kind, p0); }

double SignalPrior::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < p0_) return 0.0;
  if (kind_ == PriorKind::Bernoulli) return 1.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  return gauss(rng);
}

VectorXd sample_signal(const SignalPrior& prior, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_signal: n must be positive");
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = prior.sample(rng);
  return x;
}

ProblemInstance generate_instance(const SignalPrior& prior, Index n, Index m, double sigma2_v,
                                  Rng& rng) {
  if (n < 1 || m < 1) throw std::invalid_argument("generate_instance: n and m must be positive");
  if (!(sigma2_v >= 0.0)) throw std::invalid_argument("generate_instance: sigma2_v must be >= 0");

  // Draw order (A column-major, then x, then v) is part of the reproducibility
  // contract; changing it changes every seeded experiment.
  ProblemInstance inst;
  inst.sigma2_v = sigma2_v;
  std::normal_distribution<double> entry(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  inst.A.resize(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) inst.A(i, j) = entry(rng);

  inst.x = sample_signal(prior, n, rng);

  std::normal_distribution<double> unit(0.0, 1.0);
  const double sd = std::sqrt(sigma2_v);
  inst.v.resize(m);
  for (Index i = 0; i < m; ++i) inst.v(i) = sd * unit(rng);

  inst.y = inst.A * inst.x + inst.v;
  return inst;
}

}  // namespace armcs
