#pragma once

#include <doctest.h>

#include <random>

#include "pencil/core.hpp"
#include "pencil/exp_poly.hpp"
#include "pencil/quadrature.hpp"

namespace testutil {

using pencil::Complex;

/// Independent quadrature oracle for inner products and other 1-D integrals:
/// adaptive Simpson on the raw integrand, no ExpPoly algebra involved.
inline Complex quad_oracle(const std::function<Complex(double)>& f, double a, double b,
                           double tol = 1e-14) {
  return pencil::integrate_adaptive(f, a, b, tol);
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline Complex random_complex(double radius = 1.0) {
  return Complex(uniform(-radius, radius), uniform(-radius, radius));
}

inline bool close(const Complex& a, const Complex& b, double tol) {
  return std::abs(a - b) <= tol;
}

} // namespace testutil
