#include "ldsignal/normal.hpp"

#include <cmath>
#include <numbers>

#include "ldsignal/errors.hpp"

namespace ldsignal {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log(1 - Phi(x)) for x > 35 from the asymptotic series of the Mills ratio.
double log_sf_asymptotic(double x) {
  double x2 = x * x;
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) / x2;
    series += term;
  }
  return -0.5 * x2 - std::log(x) - kLogSqrt2Pi + std::log(series);
}

}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_sf(double x) {
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double log_normal_sf(double x) {
  if (x > 35.0) return log_sf_asymptotic(x);
  if (x < -5.0) return std::log1p(-normal_sf(-x));
  return std::log(normal_sf(x));
}

double log_normal_cdf(double x) {
  return log_normal_sf(-x);
}

double normal_isf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal_isf: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -normal_isf(1.0 - p);

  // Newton on log(1 - Phi(x)) - log p, which is concave and decreasing.
  double target = std::log(p);
  double l = -2.0 * target;
  double x = std::sqrt(std::max(0.0, l - std::log(l) - std::log(2.0 * std::numbers::pi)));
  if (!(x > 0.0)) x = 0.1;
  for (int it = 0; it < 100; ++it) {
    double ls = log_normal_sf(x);
    // d/dx log sf = -pdf/sf
    double deriv = -std::exp(-0.5 * x * x - kLogSqrt2Pi - ls);
    double step = (ls - target) / deriv;
    x -= step;
    if (x < 0.0) x = 0.0;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace ldsignal
