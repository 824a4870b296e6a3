#ifndef BBABC_NUMERICS_HPP
#define BBABC_NUMERICS_HPP

// Special functions used by the likelihood and estimation code.
//
// All three follow the same pattern: shift the argument upward with the
// functional recurrence until the asymptotic (Stirling / Bernoulli) series
// is accurate to double precision, then undo the shift.

#include <cmath>
#include <numbers>
#include <string>

#include "bbabc/error.hpp"

namespace bbabc {

namespace detail {

inline void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  detail::require_positive(x, "log_gamma");
  constexpr double kShift = 15.0;
  double log_shift = 0.0;
  if (x < kShift) {
    // lnG(x) = lnG(x + k) - ln(x (x+1) ... (x+k-1)); the product stays well
    // inside double range for x >= denorm and k <= 15.
    double prod = 1.0;
    while (x < kShift) {
      prod *= x;
      x += 1.0;
    }
    log_shift = std::log(prod);
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // B_{2k} / (2k (2k-1) x^{2k-1}), k = 1..8
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 +
                                                     inv2 * (1.0 / 156.0 +
                                                             inv2 * (-3617.0 / 122400.0))))))));
  constexpr double kHalfLog2Pi = 0.91893853320467274178032973640561764;
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + series - log_shift;
}

/// Digamma psi(x) = d/dx ln Gamma(x) for x > 0.
inline double digamma(double x) {
  detail::require_positive(x, "digamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 / x - series;
}

/// Trigamma psi'(x) for x > 0.
inline double trigamma(double x) {
  detail::require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_k B_{2k} / x^{2k+1}
  const double series =
      inv * inv2 *
      (1.0 / 6.0 +
       inv2 * (-1.0 / 30.0 +
               inv2 * (1.0 / 42.0 +
                       inv2 * (-1.0 / 30.0 +
                               inv2 * (5.0 / 66.0 + inv2 * (-691.0 / 2730.0 + inv2 * (7.0 / 6.0)))))));
  return acc + inv + 0.5 * inv2 + series;
}

/// ln B(a, b).
inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace bbabc

#endif  // BBABC_NUMERICS_HPP
