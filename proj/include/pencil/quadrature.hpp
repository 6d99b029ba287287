#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pencil/core.hpp"

namespace pencil {

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// the Legendre recurrence.  Deterministic for a given n.
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) {
    if (n < 1) throw InputError("GaussLegendre: need n >= 1");
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

/// Gauss-Legendre integral of f over [a, b] with n nodes.
inline Complex integrate_gl(const std::function<Complex(double)>& f, double a, double b, int n) {
  GaussLegendre gl(n);
  Complex s(0.0);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) s += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return s * half;
}

/// Trapezoid rule for a periodic integrand over one full period [a, b].
inline Complex integrate_periodic(const std::function<Complex(double)>& f, double a, double b,
                                  int n) {
  Complex s(0.0);
  double h = (b - a) / n;
  for (int i = 0; i < n; ++i) s += f(a + i * h);
  return s * h;
}

/// Adaptive Simpson (used by independent test oracles and residual probes).
namespace detail {
inline Complex simpson(const std::function<Complex(double)>&, double a, double b, Complex fa,
                       Complex fm, Complex fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline Complex adaptive_simpson_rec(const std::function<Complex(double)>& f, double a, double b,
                                    Complex fa, Complex fm, Complex fb, Complex whole, double tol,
                                    int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  Complex flm = f(lm), frm = f(rm);
  Complex left = simpson(f, a, m, fa, flm, fm);
  Complex right = simpson(f, m, b, fm, frm, fb);
  Complex delta = left + right - whole;
  if (depth > 40 || std::abs(delta) < 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}
} // namespace detail

inline Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                                  double tol = 1e-13) {
  Complex fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  Complex whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0);
}

} // namespace pencil
