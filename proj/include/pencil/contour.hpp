#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pencil/core.hpp"

namespace pencil {

/// Axis-aligned rectangle in the complex plane.
struct Rect {
  double re_lo, re_hi, im_lo, im_hi;

  double width() const { return re_hi - re_lo; }
  double height() const { return im_hi - im_lo; }
  double diameter() const { return std::hypot(width(), height()); }
  Complex center() const { return Complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)); }
  bool contains(const Complex& z) const {
    return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
  }
};

namespace detail {

/// Accumulate the argument change of f along the straight segment [a, b],
/// bisecting until successive phase increments are below pi/2.
inline double arg_change_on_segment(const std::function<Complex(Complex)>& f, Complex a,
                                    Complex b, Complex fa, Complex fb, double abs_tol,
                                    int depth) {
  double da = std::arg(fb / fa);
  if (std::abs(da) < kPi / 2.0) return da;
  if (depth > 48) throw ContourError("winding_count: phase tracking failed to resolve");
  Complex m = 0.5 * (a + b);
  Complex fm = f(m);
  if (!is_finite(fm) || std::abs(fm) < abs_tol)
    throw ContourError("winding_count: function vanishes on (or near) the contour");
  return arg_change_on_segment(f, a, m, fa, fm, abs_tol, depth + 1) +
         arg_change_on_segment(f, m, b, fm, fb, abs_tol, depth + 1);
}

} // namespace detail

/// Number of zeros (with multiplicity) of an analytic f inside the rectangle,
/// by the argument principle.  Requires f nonzero on the contour; the check is
/// min |f| over the sampled contour > abs_tol.
inline int winding_count(const std::function<Complex(Complex)>& f, const Rect& box,
                         int nodes_per_side = 16, double abs_tol = 1e-8) {
  if (!(box.re_lo < box.re_hi) || !(box.im_lo < box.im_hi))
    throw InputError("winding_count: degenerate rectangle");
  int n = std::max(nodes_per_side, 4);
  std::vector<Complex> pts;
  pts.reserve(4 * n + 1);
  auto push_edge = [&](Complex a, Complex b) {
    for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
  };
  Complex c1(box.re_lo, box.im_lo), c2(box.re_hi, box.im_lo), c3(box.re_hi, box.im_hi),
      c4(box.re_lo, box.im_hi);
  push_edge(c1, c2);
  push_edge(c2, c3);
  push_edge(c3, c4);
  push_edge(c4, c1);
  pts.push_back(c1);

  std::vector<Complex> fv(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    fv[i] = f(pts[i]);
    if (!is_finite(fv[i])) throw NumericalError("winding_count: non-finite sample");
    if (std::abs(fv[i]) < abs_tol)
      throw ContourError("winding_count: function vanishes on (or near) the contour");
  }

  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    total += detail::arg_change_on_segment(f, pts[i], pts[i + 1], fv[i], fv[i + 1], abs_tol, 0);

  double raw = total / (2.0 * kPi);
  double rounded = std::round(raw);
  if (std::abs(raw - rounded) >= 0.25)
    throw ContourError("winding_count: argument total " + format_g17(raw) +
                       " too far from an integer");
  return static_cast<int>(rounded);
}

} // namespace pencil
