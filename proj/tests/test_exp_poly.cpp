#include <doctest.h>

#include "pencil/exp_poly.hpp"
#include "test_helpers.hpp"

using namespace pencil;
using testutil::quad_oracle;

TEST_CASE("expoly eval: constant, sinh profile, zero factor") {
  ExpPoly one = ExpPoly::constant(1.0, 0.0, 3.0);
  CHECK(std::abs(one.eval(2.7) - Complex(1.0)) < 1e-15);

  // sinh((4i/3) w) at w = pi/2 equals i * sin(2 pi / 3)
  ExpPoly f = ExpPoly::sinh_profile(Complex(0.0, 4.0 / 3.0), 0.0, 0.0, kPi);
  Complex expected = kI * std::sin(2.0 * kPi / 3.0);
  CHECK(std::abs(f.eval(kPi / 2.0) - expected) < 1e-14);
  CHECK(std::abs(expected - Complex(0.0, 0.8660254037844386)) < 1e-15);

  ExpPoly g = ExpPoly::term(1.0, 1, kI, -1.0, 1.0); // w * e^{i w}
  CHECK(std::abs(g.eval(0.0)) == 0.0);
}

TEST_CASE("expoly eval outside domain is a range error") {
  ExpPoly one = ExpPoly::constant(1.0, 0.0, 1.0);
  CHECK_THROWS_AS(one.eval(2.0), DomainError);
}

TEST_CASE("expoly power guard") {
  CHECK_THROWS_AS(ExpPoly::term(1.0, 65, Complex(0.0), 0.0, 1.0), InputError);
}

TEST_CASE("expoly inner: trivial cases") {
  ExpPoly one = ExpPoly::constant(1.0, 0.0, kPi);
  CHECK(std::abs(expoly_inner(one, one) - Complex(kPi)) < 1e-14);

  ExpPoly e = ExpPoly::term(1.0, 0, kI, 0.0, 2.0 * kPi); // e^{i w}
  CHECK(std::abs(expoly_inner(e, e) - Complex(2.0 * kPi)) < 1e-13);
}

TEST_CASE("expoly inner: sin(4w/3) vs sin(2w) on [0, pi] against quadrature oracle") {
  ExpPoly f = ExpPoly::sin_profile(4.0 / 3.0, 0.0, 0.0, kPi);
  ExpPoly g = ExpPoly::sin_profile(2.0, 0.0, 0.0, kPi);
  Complex exact = expoly_inner(f, g);
  Complex oracle = quad_oracle(
      [](double w) { return Complex(std::sin(4.0 * w / 3.0) * std::sin(2.0 * w)); }, 0.0, kPi);
  CHECK(std::abs(exact - oracle) < 1e-12);
  // closed form: 9 sqrt(3) / 20
  CHECK(std::abs(exact - Complex(9.0 * std::sqrt(3.0) / 20.0)) < 1e-13);
}

TEST_CASE("expoly inner(f, f) is real nonnegative; zero only for the zero profile") {
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<ExpTerm> terms;
    int nt = 1 + trial % 3;
    for (int t = 0; t < nt; ++t)
      terms.push_back(ExpTerm{testutil::random_complex(2.0),
                              Complex(testutil::uniform(-1.0, 1.0), testutil::uniform(-2.0, 2.0)),
                              trial % 3});
    ExpPoly f(terms, 0.0, kPi);
    Complex v = expoly_inner(f, f);
    CHECK(std::abs(v.imag()) < 1e-10 * std::max(1.0, std::abs(v.real())));
    CHECK(v.real() >= -1e-12);
  }
  ExpPoly z = ExpPoly::zero(0.0, kPi);
  CHECK(std::abs(expoly_inner(z, z)) == 0.0);
  // vanishing inner product forces vanishing samples
  bool all_small = true;
  for (int i = 0; i <= 50; ++i)
    if (std::abs(z.eval(kPi * i / 50.0)) > 1e-12) all_small = false;
  CHECK(all_small);
}

TEST_CASE("expoly derivative matches central finite differences") {
  std::vector<ExpTerm> terms = {ExpTerm{Complex(0.3, -1.2), Complex(0.4, 1.7), 2},
                                ExpTerm{Complex(-2.0, 0.5), Complex(-0.3, 0.9), 0},
                                ExpTerm{Complex(1.1, 1.1), Complex(0.0), 1}};
  ExpPoly f(terms, 0.2, 2.8);
  ExpPoly df = f.derivative();
  const double h = 1e-5;
  for (int i = 1; i < 20; ++i) {
    double w = 0.2 + (2.8 - 0.2) * i / 20.0;
    Complex fd = (f.eval(w + h) - f.eval(w - h)) / (2.0 * h);
    Complex an = df.eval(w);
    CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("expoly antiderivative inverts derivative and matches quadrature") {
  std::vector<ExpTerm> terms = {ExpTerm{Complex(1.0, 0.4), Complex(0.0, -2.0), 3},
                                ExpTerm{Complex(0.2, -0.7), Complex(1.3, 0.0), 1}};
  ExpPoly f(terms, 0.0, 1.5);
  ExpPoly F = f.antiderivative();
  ExpPoly back = F.derivative();
  for (int i = 0; i <= 10; ++i) {
    double w = 1.5 * i / 10.0;
    CHECK(std::abs(back.eval(w) - f.eval(w)) < 1e-11);
  }
  Complex oracle = quad_oracle([&f](double w) { return f.eval(w); }, 0.0, 1.5);
  CHECK(std::abs(f.integral() - oracle) < 1e-12);
}

TEST_CASE("expoly product and shift") {
  ExpPoly a = ExpPoly::cos_profile(2.0, 0.0, 0.0, kPi);
  ExpPoly b = ExpPoly::sin_profile(1.0, 0.5, 0.0, kPi);
  ExpPoly ab = a * b;
  for (double w : {0.1, 1.0, 2.0, 3.0})
    CHECK(std::abs(ab.eval(w) - a.eval(w) * b.eval(w)) < 1e-13);

  ExpPoly shifted = a.shifted_argument(0.7, -0.7, kPi - 0.7);
  for (double w : {-0.5, 0.0, 1.3})
    CHECK(std::abs(shifted.eval(w) - a.eval(w + 0.7)) < 1e-13);
}

TEST_CASE("conjugation maps terms correctly") {
  ExpPoly f = ExpPoly::term(Complex(1.0, 2.0), 1, Complex(0.5, -0.5), 0.0, 1.0);
  ExpPoly g = f.conjugated();
  for (double w : {0.2, 0.8}) CHECK(std::abs(g.eval(w) - std::conj(f.eval(w))) < 1e-14);
}

TEST_CASE("canonicalization merges duplicate exponents") {
  std::vector<ExpTerm> terms = {ExpTerm{Complex(1.0), Complex(0.0, 1.0), 0},
                                ExpTerm{Complex(2.0), Complex(0.0, 1.0 + 1e-14), 0}};
  ExpPoly f(terms, 0.0, 1.0);
  CHECK(f.terms().size() == 1);
  CHECK(std::abs(f.terms()[0].coeff - Complex(3.0)) < 1e-12);
}
