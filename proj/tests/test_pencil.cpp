#include <doctest.h>

#include "pencil/pencil.hpp"
#include "pencil/contour.hpp"
#include "test_helpers.hpp"

using namespace pencil;

namespace {

AnglePencil dirichlet_pencil(double b2) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, std::nullopt};
  return AnglePencil(0.0, b2, lower, upper);
}

/// The worked nonlocal configuration: b1=0, b2=pi, row2 adds
/// e2 * phi(b2 + omega2) with omega2 = -pi/2, beta2 = 1.
AnglePencil nonlocal_example(Complex e2 = Complex(1.0), double beta2 = 1.0) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  NonlocalTerm t;
  t.e = e2;
  t.shift = -kPi / 2.0;
  t.beta = beta2;
  t.order = 0;
  t.tau = {Complex(1.0), Complex(0.0)};
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  return AnglePencil(0.0, kPi, lower, upper);
}

} // namespace

TEST_CASE("pencil validation") {
  CHECK_THROWS_AS(dirichlet_pencil(2.1 * kPi), InputError);
  // nonlocal shift must land strictly inside the angle
  NonlocalTerm t;
  t.e = 1.0;
  t.shift = -2.0 * kPi; // maps b2 to below b1
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  CHECK_THROWS_AS(AnglePencil(0.0, kPi, lower, upper), InputError);
}

TEST_CASE("fundamental system: lambda = 0 limit and cosh value") {
  AnglePencil p = dirichlet_pencil(kPi);
  auto [s1, s2] = fundamental_system(p, Complex(0.0));
  CHECK(std::abs(s1.eval(1.3) - Complex(1.0)) < 1e-14);
  CHECK(std::abs(s2.eval(1.3) - Complex(1.3)) < 1e-14);

  auto [t1, t2] = fundamental_system(p, Complex(1.0));
  CHECK(std::abs(t1.eval(1.0) - Complex(std::cosh(1.0))) < 1e-13);
  CHECK(std::abs(Complex(std::cosh(1.0)) - Complex(1.5430806348152437)) < 1e-12);

  // sinh(i x) = i sin(x) bookkeeping: s2 at lambda = 4i/3 is sin(4w/3)/(4/3)
  auto [u1, u2] = fundamental_system(p, Complex(0.0, 4.0 / 3.0));
  double w = 0.9;
  CHECK(std::abs(u2.eval(w) - Complex(std::sin(4.0 * w / 3.0) / (4.0 / 3.0))) < 1e-13);
  CHECK(std::abs(u1.eval(w) - Complex(std::cos(4.0 * w / 3.0))) < 1e-13);

  // normalization at b1
  for (Complex lam : {Complex(0.7, 0.3), Complex(0.0, 2.0), Complex(0.0)}) {
    auto [f1, f2] = fundamental_system(p, lam);
    CHECK(std::abs(f1.eval(0.0) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(f1.derivative().eval(0.0)) < 1e-14);
    CHECK(std::abs(f2.eval(0.0)) < 1e-14);
    CHECK(std::abs(f2.derivative().eval(0.0) - Complex(1.0)) < 1e-14);
  }
}

TEST_CASE("fundamental jet terms match divided differences of the system") {
  AnglePencil p = dirichlet_pencil(1.5 * kPi);
  Complex lam(0.35, 0.82);
  const double h = 1e-5;
  for (int q : {1, 2}) {
    auto jet = fundamental_jet_term(p, lam, q);
    // central difference oracle for (1/q!) d^q/d lambda^q
    auto sample = [&](Complex l, double w, bool second) {
      FundamentalValues v = fundamental_values(p, l, w);
      return second ? v.s2 : v.s1;
    };
    for (double w : {0.4, 1.9, 3.6}) {
      for (bool second : {false, true}) {
        Complex fd;
        if (q == 1)
          fd = (sample(lam + h, w, second) - sample(lam - h, w, second)) / (2.0 * h);
        else
          fd = (sample(lam + h, w, second) - 2.0 * sample(lam, w, second) +
                sample(lam - h, w, second)) /
               (h * h) / 2.0;
        Complex an = second ? jet.second.eval(w) : jet.first.eval(w);
        CHECK(std::abs(fd - an) < 2e-5 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("char matrix: Dirichlet row normalization") {
  AnglePencil p = dirichlet_pencil(kPi);
  for (Complex lam : {Complex(0.3, 1.1), Complex(0.0, 2.0)}) {
    CHECK(std::abs(char_entry(p, 0, 0, lam) - Complex(1.0)) < 1e-13);
    CHECK(std::abs(char_entry(p, 0, 1, lam)) < 1e-13);
  }
}

TEST_CASE("char matrix: worked nonlocal row at lambda = -i") {
  AnglePencil p = nonlocal_example();
  Complex lam(0.0, -1.0);
  // cosh(-i w) = cos w, so entry(2,1) = cos(pi) + cos(pi/2) = -1
  CHECK(std::abs(char_entry(p, 1, 0, lam) - Complex(-1.0)) < 1e-13);
  CHECK(std::abs(char_entry(p, 1, 1, lam) - Complex(1.0)) < 1e-13);
}

TEST_CASE("char det: Dirichlet zeros at i k pi / d and worked example factorization") {
  AnglePencil p = dirichlet_pencil(1.5 * kPi);
  CHECK(std::abs(char_det(p, Complex(0.0, 2.0 / 3.0))) < 1e-10);
  CHECK(std::abs(char_det(p, Complex(0.0)) - Complex(1.5 * kPi)) < 1e-12);

  AnglePencil q = nonlocal_example();
  CHECK(std::abs(char_det(q, Complex(0.0, 4.0 / 3.0))) < 1e-10);
  // det = [sinh(lambda pi) + sinh(lambda pi/2)] / lambda = sinh(z)(2 cosh(z)+1)/lambda
  for (Complex lam : {Complex(0.4, 0.9), Complex(-0.3, 2.2)}) {
    Complex z = lam * kPi / 2.0;
    Complex expected = std::sinh(z) * (2.0 * std::cosh(z) + 1.0) / lam;
    CHECK(std::abs(char_det(q, lam) - expected) < 1e-11 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("det jet order-0 vanishes at Dirichlet eigenvalues") {
  double d = 1.1;
  AnglePencil p = dirichlet_pencil(d);
  for (int k : {1, 2, 3}) {
    CharMatrix m = char_matrix(p, Complex(0.0, k * kPi / d), 0);
    Complex det0 = m.at(0, 0).coeffs[0] * m.at(1, 1).coeffs[0] -
                   m.at(0, 1).coeffs[0] * m.at(1, 0).coeffs[0];
    CHECK(std::abs(det0) < 1e-10);
  }
}

TEST_CASE("char det conj-symmetry for real data with beta = 1") {
  AnglePencil p = nonlocal_example(Complex(0.7), 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Complex lam = testutil::random_complex(3.0);
    Complex a = char_det(p, -std::conj(lam));
    Complex b = std::conj(char_det(p, lam));
    CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("char det entirety: overlapping jets agree") {
  AnglePencil p = nonlocal_example();
  auto det = [&p](Complex z) { return char_det(p, z); };
  Complex c1(0.1, 1.2), c2(0.16, 1.26);
  AnalyticJet j1 = analytic_jet(det, c1, 10, 0.2);
  AnalyticJet j2 = analytic_jet(det, c2, 10, 0.2);
  for (Complex z : {Complex(0.13, 1.23), Complex(0.12, 1.21)}) {
    CHECK(std::abs(j1.eval(z) - j2.eval(z)) < 1e-8);
    CHECK(std::abs(j1.eval(z) - det(z)) < 1e-8);
  }
}

TEST_CASE("Dirichlet zero set in a box equals the sinh lattice, by winding") {
  double d = 1.5 * kPi;
  AnglePencil p = dirichlet_pencil(d);
  auto det = [&p](Complex z) { return char_det(p, z); };
  Rect box{-1.0, 1.0, 0.1, 3.0};
  int expected = 0;
  for (int k = 1; k < 100; ++k) {
    double im = k * kPi / d;
    if (im > box.im_lo && im < box.im_hi) ++expected;
  }
  CHECK(winding_count(det, box) == expected);
}

TEST_CASE("periodic eigendata: strips") {
  auto mid = periodic_eigendata(0.5, 1.5);
  REQUIRE(mid.size() == 1);
  CHECK(std::abs(mid[0].lambda - Complex(0.0, 1.0)) < 1e-15);
  CHECK(mid[0].chains.size() == 2);
  CHECK(mid[0].chains[0].length() == 1);
  CHECK(mid[0].chains[1].length() == 1);

  auto zero = periodic_eigendata(-0.5, 0.5);
  REQUIRE(zero.size() == 1);
  CHECK(std::abs(zero[0].lambda) == 0.0);
  REQUIRE(zero[0].chains.size() == 1);
  CHECK(zero[0].chains[0].length() == 2);
  CHECK(std::abs(zero[0].chains[0].profiles[0].eval(1.0) - Complex(1.0)) < 1e-15);
  CHECK(zero[0].chains[0].profiles[1].empty());

  CHECK(periodic_eigendata(1.1, 1.9).empty());
  CHECK_THROWS_AS(periodic_eigendata(1.0 - 1e-12, 1.9), StripViolationError);
}
