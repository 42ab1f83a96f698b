#pragma once

#include <cmath>

namespace armcs {

struct GoldenResult {
  double x;      ///< argument of the best point found
  double value;  ///< objective at x
};

/// Golden-section maximization of a unimodal f over log(x), x in [lo, hi],
/// until the log-bracket is narrower than log_tol.
template <typename F>
GoldenResult golden_maximize_log(F&& f, double lo, double hi, double log_tol) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  while (b - a > log_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return fc >= fd ? GoldenResult{std::exp(c), fc} : GoldenResult{std::exp(d), fd};
}

template <typename F>
GoldenResult golden_minimize_log(F&& f, double lo, double hi, double log_tol) {
  GoldenResult r = golden_maximize_log([&](double x) { return -f(x); }, lo, hi, log_tol);
  r.value = -r.value;
  return r;
}

}  // namespace armcs
