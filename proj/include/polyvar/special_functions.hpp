#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace polyvar {

inline constexpr double kEulerGamma = 0.57721566490153286061;

namespace detail {

inline constexpr double kSpecialShift = 10.0;

inline void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument(std::string(name) + " needs a positive finite argument");
}

}  // namespace detail

/// Psi0(x) = Gamma'(x)/Gamma(x). Shifts x up past 10 with
/// Psi0(x) = Psi0(x+1) - 1/x, then uses
/// log x - 1/(2x) - sum B_{2k} / (2k x^{2k}) through k = 7.
inline double digamma(double x) {
  detail::require_positive(x, "digamma");
  double acc = 0.0;
  while (x < detail::kSpecialShift) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double t = 1.0 / (x * x);
  // B2/2, B4/4, ..., B14/14
  const double series =
      t * (1.0 / 12 -
           t * (1.0 / 120 -
                t * (1.0 / 252 -
                     t * (1.0 / 240 - t * (1.0 / 132 - t * (691.0 / 32760 - t * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 / x - series;
}

/// Psi1(x) = Psi0'(x). Shifts with Psi1(x) = Psi1(x+1) + 1/x^2, then uses
/// 1/x + 1/(2x^2) + sum B_{2k} / x^{2k+1} through k = 7.
inline double trigamma(double x) {
  detail::require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < detail::kSpecialShift) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double t = 1.0 / (x * x);
  // B2, B4, ..., B14
  const double series =
      t * (1.0 / 6 -
           t * (1.0 / 30 -
                t * (1.0 / 42 - t * (1.0 / 30 - t * (5.0 / 66 - t * (691.0 / 2730 - t * (7.0 / 6)))))));
  return acc + 1.0 / x + 0.5 * t + series / x;
}

}  // namespace polyvar
