#include <doctest.h>

#include "pencil/analytic_jet.hpp"
#include "pencil/contour.hpp"
#include "test_helpers.hpp"

using namespace pencil;

TEST_CASE("analytic jet of lambda^2 about 0") {
  AnalyticJet j = analytic_jet([](Complex z) { return z * z; }, Complex(0.0), 2);
  CHECK(std::abs(j.coeffs[0]) < 1e-12);
  CHECK(std::abs(j.coeffs[1]) < 1e-12);
  CHECK(std::abs(j.coeffs[2] - Complex(1.0)) < 1e-12);
}

TEST_CASE("analytic jet of exp about 0") {
  AnalyticJet j = analytic_jet([](Complex z) { return std::exp(z); }, Complex(0.0), 4);
  double fact = 1.0;
  for (int k = 0; k <= 4; ++k) {
    if (k > 0) fact *= k;
    CHECK(std::abs(j.coeffs[k] - Complex(1.0 / fact)) < 1e-10);
  }
}

TEST_CASE("analytic jet of sinh(pi z)/z about 2i/3 matches symbolic derivative") {
  auto f = [](Complex z) { return std::sinh(z * kPi) / z; };
  Complex c(0.0, 2.0 / 3.0);
  AnalyticJet j = analytic_jet(f, c, 1);
  // symbolic oracle: f = sinh(pi z)/z, f' = (pi z cosh(pi z) - sinh(pi z)) / z^2
  Complex f0 = std::sinh(kPi * c) / c;
  Complex f1 = (kPi * c * std::cosh(kPi * c) - std::sinh(kPi * c)) / (c * c);
  CHECK(std::abs(j.coeffs[0] - f0) < 1e-11);
  CHECK(std::abs(j.derivative_value(1) - f1) < 1e-10);
}

TEST_CASE("jet order-0 coefficient equals f(center)") {
  auto f = [](Complex z) { return std::cos(z) * std::exp(0.3 * z); };
  Complex c(0.4, -0.2);
  AnalyticJet j = analytic_jet(f, c, 3);
  CHECK(std::abs(j.coeffs[0] - f(c)) < 1e-12);
}

TEST_CASE("winding count: simple and double zero") {
  Rect box{-1.0, 1.0, -1.0, 1.0};
  CHECK(winding_count([](Complex z) { return z; }, box) == 1);
  CHECK(winding_count([](Complex z) { return z * z; }, box) == 2);
}

TEST_CASE("winding count: zeros of sinh(3 pi z / 2)/z at 2ik/3") {
  auto f = [](Complex z) { return std::sinh(z * (3.0 * kPi / 2.0)) / z; };
  // zeros at 2ik/3: only 2i/3 in (0.5, 1.2); both 2i/3 and 4i/3 in (0.5, 1.5)
  CHECK(winding_count(f, Rect{-1.0, 1.0, 0.5, 1.2}) == 1);
  CHECK(winding_count(f, Rect{-1.0, 1.0, 0.5, 1.5}) == 2);
}

TEST_CASE("winding count rejects zeros on the contour") {
  Rect box{-1.0, 1.0, -1.0, 1.0};
  CHECK_THROWS_AS(winding_count([](Complex z) { return z - Complex(1.0, 0.0); }, box),
                  ContourError);
}

TEST_CASE("winding count is additive across a split with no zero on the cut") {
  auto f = [](Complex z) { return (z - Complex(0.3, 0.4)) * (z + Complex(0.5, 0.2)); };
  Rect whole{-1.0, 1.0, -1.0, 1.0};
  Rect left{-1.0, 0.0, -1.0, 1.0};
  Rect right{0.0, 1.0, -1.0, 1.0};
  CHECK(winding_count(f, whole) == winding_count(f, left) + winding_count(f, right));
}
