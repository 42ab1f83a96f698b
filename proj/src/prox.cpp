#include "armcs/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace armcs {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// x * pdf(x), zero at both infinities.
double x_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return x * gaussian_pdf(x);
}

void check_interval(double a, double b, double sigma_r) {
  if (std::isnan(a) || std::isnan(b) || a > b) {
    throw std::invalid_argument("truncated gaussian moment: require a <= b");
  }
  if (!(sigma_r > 0.0)) {
    throw std::invalid_argument("truncated gaussian moment: require sigma_r > 0");
  }
}

// P(a <= Z <= b) for standard Z; uses whichever tail keeps both terms small.
double standard_mass(double lo, double hi) {
  if (lo >= 0.0) return gaussian_sf(lo) - gaussian_sf(hi);
  if (hi <= 0.0) return gaussian_cdf(hi) - gaussian_cdf(lo);
  return 1.0 - gaussian_cdf(lo) - gaussian_sf(hi);
}

}  // namespace

double gaussian_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double gaussian_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double soft_threshold(double q, double gamma) {
  const double mag = std::abs(q) - gamma;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, q);
}

double l1_envelope(double q, double gamma) {
  const double aq = std::abs(q);
  if (aq <= gamma) return 0.5 * q * q;
  return gamma * aq - 0.5 * gamma * gamma;
}

double truncated_gaussian_mass(double a, double b, double sigma_r) {
  check_interval(a, b, sigma_r);
  return standard_mass(a / sigma_r, b / sigma_r);
}

double truncated_gaussian_mean(double a, double b, double sigma_r) {
  check_interval(a, b, sigma_r);
  return sigma_r * (gaussian_pdf(a / sigma_r) - gaussian_pdf(b / sigma_r));
}

double truncated_gaussian_second_moment(double a, double b, double sigma_r) {
  check_interval(a, b, sigma_r);
  const double lo = a / sigma_r;
  const double hi = b / sigma_r;
  return sigma_r * sigma_r * (x_pdf(lo) - x_pdf(hi) + standard_mass(lo, hi));
}

double expected_l1_envelope_gaussian(double gamma, double mu, double s) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("expected envelope: gamma must be >= 0");
  if (!(s > 0.0)) throw std::invalid_argument("expected envelope: s must be > 0");

  // Q = mu + R with R ~ N(0, s^2); split at |Q| = gamma.
  const double lo = -gamma - mu;
  const double hi = gamma - mu;

  const double m0_mid = truncated_gaussian_mass(lo, hi, s);
  const double m1_mid = truncated_gaussian_mean(lo, hi, s);
  const double m2_mid = truncated_gaussian_second_moment(lo, hi, s);
  const double quadratic = 0.5 * (mu * mu * m0_mid + 2.0 * mu * m1_mid + m2_mid);

  // Q > gamma: gamma Q - gamma^2/2
  const double m0_up = truncated_gaussian_mass(hi, kInf, s);
  const double m1_up = truncated_gaussian_mean(hi, kInf, s);
  const double upper = gamma * (mu * m0_up + m1_up) - 0.5 * gamma * gamma * m0_up;

  // Q < -gamma: -gamma Q - gamma^2/2
  const double m0_dn = truncated_gaussian_mass(-kInf, lo, s);
  const double m1_dn = truncated_gaussian_mean(-kInf, lo, s);
  const double lower = -gamma * (mu * m0_dn + m1_dn) - 0.5 * gamma * gamma * m0_dn;

  return quadratic + upper + lower;
}

}  // namespace armcs
