#pragma once

#include <limits>

namespace armcs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard Gaussian density and distribution function. Both accept +-inf.
double gaussian_pdf(double x);
double gaussian_cdf(double x);
/// 1 - gaussian_cdf(x), computed without cancellation in the upper tail.
double gaussian_sf(double x);

/// Proximity operator of gamma*|.|: sign(q) max(|q| - gamma, 0).
double soft_threshold(double q, double gamma);

/// Moreau envelope of gamma*|.| evaluated at q (the Huber function):
/// q^2/2 for |q| <= gamma, gamma|q| - gamma^2/2 otherwise.
double l1_envelope(double q, double gamma);

// Integrals of r^k p_R(r) over [a, b] for p_R the N(0, sigma_r^2) density,
// k = 0, 1, 2. Either limit may be infinite; a > b or sigma_r <= 0 throws
// std::invalid_argument.
double truncated_gaussian_mass(double a, double b, double sigma_r);
double truncated_gaussian_mean(double a, double b, double sigma_r);
double truncated_gaussian_second_moment(double a, double b, double sigma_r);

/// E[l1_envelope(Q, gamma)] for Q ~ N(mu, s^2), in closed form.
double expected_l1_envelope_gaussian(double gamma, double mu, double s);

}  // namespace armcs
