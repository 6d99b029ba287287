#pragma once

#include <functional>
#include <vector>

#include "pencil/core.hpp"

namespace pencil {

/// Truncated Taylor expansion of an analytic function about a center,
/// together with the radius used to validate it.
struct AnalyticJet {
  Complex center;
  double radius = 0.0;
  std::vector<Complex> coeffs; // coeffs[k] ~ f^{(k)}(center)/k!

  int order() const { return static_cast<int>(coeffs.size()) - 1; }

  Complex eval(const Complex& z) const {
    Complex dz = z - center, s(0.0), p(1.0);
    for (const Complex& c : coeffs) {
      s += c * p;
      p *= dz;
    }
    return s;
  }

  Complex derivative_value(int k) const {
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    return coeffs.at(k) * fact;
  }
};

/// Taylor coefficients through order K by the Cauchy integral on a circle of
/// radius rho, trapezoid rule with N equispaced nodes.  Uniform treatment of
/// every analytic lambda-dependence, including dilation factors beta^{i*lambda-m}.
inline AnalyticJet analytic_jet(const std::function<Complex(Complex)>& f, Complex center,
                                int order, double rho = 0.1, int nodes = 0) {
  if (order < 0) throw InputError("analytic_jet: order must be >= 0");
  if (!(rho > 0.0)) throw InputError("analytic_jet: radius must be positive");
  int N = nodes > 0 ? nodes : std::max(64, 8 * order);
  N = std::max(N, std::max(32, 8 * order));
  std::vector<Complex> samples(N);
  for (int j = 0; j < N; ++j) {
    double th = 2.0 * kPi * j / N;
    Complex z = center + rho * Complex(std::cos(th), std::sin(th));
    Complex v = f(z);
    if (!is_finite(v)) throw NumericalError("analytic_jet: non-finite sample on contour");
    samples[j] = v;
  }
  AnalyticJet jet{center, rho, std::vector<Complex>(order + 1)};
  for (int k = 0; k <= order; ++k) {
    Complex s(0.0);
    for (int j = 0; j < N; ++j) {
      double th = 2.0 * kPi * j * k / N;
      s += samples[j] * Complex(std::cos(th), -std::sin(th));
    }
    jet.coeffs[k] = s / (static_cast<double>(N) * std::pow(rho, k));
  }
  return jet;
}

/// First vanishing order of the jet: smallest k with |c_k| above a relative
/// threshold; returns order()+1 when all coefficients are negligible.
inline int jet_vanishing_order(const AnalyticJet& jet, double rtol = 1e-9) {
  double scale = 0.0;
  for (const Complex& c : jet.coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return jet.order() + 1;
  for (int k = 0; k <= jet.order(); ++k)
    if (std::abs(jet.coeffs[k]) > rtol * scale) return k;
  return jet.order() + 1;
}

} // namespace pencil
