#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "wreath/group.hpp"

namespace wreath::testing {

// Enclosure of S = sum_{j >= 1} ((j + gap)^a - j^a)^2 from a long double
// partial sum and quadrature of the decreasing summand g over [n, inf).
struct Enclosure {
  double lo = 0;
  double hi = 0;
};

// integral_n^inf g(u) du after u = n s^(-1/b), b = 1 - 2a, which turns the
// slowly decaying integrand into a smooth one on (0, 1].
inline double tail_integral(double alpha, Int gap, Int n) {
  const double b = 1 - 2 * alpha;
  const double g = double(gap);
  auto h = [&](double s) {
    const double w = g / double(n) * std::pow(s, 1 / b);  // gap / u
    const double ratio = w > 0 ? std::expm1(alpha * std::log1p(w)) / w : alpha;
    return g * g * ratio * ratio * std::pow(double(n), -b) / b;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(h, 0.0, 1.0);
}

inline Enclosure cursor_series(double alpha, Int gap, Int n) {
  long double partial = 0;
  const long double a = alpha;
  for (Int j = 1; j < n; ++j) {
    const long double d = std::pow((long double)(j + gap), a) - std::pow((long double)j, a);
    partial += d * d;
  }
  const double last = std::pow(double(n + gap), alpha) - std::pow(double(n), alpha);
  const double integral = tail_integral(alpha, gap, n);
  // integral_n^inf g <= sum_{j >= n} g(j) <= g(n) + integral_n^inf g
  return {double(partial) + integral, double(partial) + integral + last * last};
}

}  // namespace wreath::testing
