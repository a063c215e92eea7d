#pragma once

// The scalar kernel phi(a) = (a+1)/(a-1) log a^2 and its relatives
// zeta(x) = x log x / (x^2 - 1) and chi(x) = phi(e^x).

#include <cmath>
#include <limits>
#include <string>

#include "moe/errors.hpp"

namespace moe {

inline constexpr double kPhiSeriesRadius = 1e-6;

/// chi(x) = 2x coth(x/2); even, convex, chi(0) = 4.
inline double chi(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double x2 = x * x;
    return 4.0 + x2 / 3.0 - x2 * x2 / 180.0;
  }
  if (ax > 80.0) return 2.0 * ax;  // coth saturates to 1 well before here
  return 2.0 * x / std::tanh(0.5 * x);
}

/// chi''(x) = (chi(x) - 4) / (2 sinh^2(x/2)), nonnegative everywhere.
inline double chi_second_derivative(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-3) {
    const double x2 = x * x;
    return 2.0 / 3.0 - x2 / 15.0 + x2 * x2 / 252.0;
  }
  if (ax > 1.0) {
    const double e = std::exp(-ax);
    const double inv = 2.0 * e / ((1.0 - e) * (1.0 - e));  // 1 / (2 sinh^2(x/2))
    return (chi(x) - 4.0) * inv;
  }
  const double s = std::sinh(0.5 * x);
  return (chi(x) - 4.0) / (2.0 * s * s);
}

inline double phi(double a) {
  if (a == 0.0 || !std::isfinite(a)) {
    throw DomainError("phi: argument must be finite and nonzero, got " + std::to_string(a));
  }
  if (std::abs(a - 1.0) < kPhiSeriesRadius) {
    const double d = a - 1.0;
    const double d2 = d * d;
    return 4.0 + d2 / 3.0 - d2 * d / 3.0 + 0.3 * d2 * d2;
  }
  if (std::abs(a + 1.0) < kPhiSeriesRadius) {
    const double d = a + 1.0;
    const double d2 = d * d;
    return d2 + d2 * d + 5.0 * d2 * d2 / 6.0;
  }
  if (a > 0.0) return chi(std::log(a));
  // a = -b: (1-b)/(-1-b) log b^2 = 2y tanh(y/2) with y = log b
  const double y = std::log(-a);
  return 2.0 * y * std::tanh(0.5 * y);
}

inline double zeta(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("zeta: argument must be positive, got " + std::to_string(x));
  }
  const double y = std::log(x);
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return 0.5 * (1.0 - y2 / 6.0 + 7.0 * y2 * y2 / 360.0);
  }
  if (std::abs(y) > 700.0) return 0.0;
  return y / (2.0 * std::sinh(y));
}

/// phi(a^2) + phi(b^2) - 2 phi(ab). Evaluated through chi on logs so that the
/// full [1e-6, 1e6] range stays well conditioned.
inline double check_phi_inequality(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("check_phi_inequality: arguments must be positive");
  }
  const double x = std::log(a);
  const double y = std::log(b);
  return chi(2.0 * x) + chi(2.0 * y) - 2.0 * chi(x + y);
}

}  // namespace moe
