#include <doctest.h>

#include "pencil/extract.hpp"
#include "test_helpers.hpp"

using namespace pencil;

namespace {

AnglePencil nonlocal_example(Complex e2 = Complex(1.0), double beta2 = 1.0) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  NonlocalTerm t;
  t.e = e2;
  t.shift = -kPi / 2.0;
  t.beta = beta2;
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  return AnglePencil(0.0, kPi, lower, upper);
}

/// Normalized periodic adjoint chains at lambda = i n.
std::pair<std::vector<ProfileChain>, std::vector<AdjointChain>> periodic_pair(int n) {
  double lo = n - 0.5, hi = n + 0.5;
  auto evs = periodic_eigendata(lo, hi);
  REQUIRE(evs.size() == 1);
  PairingProvider pairing(evs[0].lambda);
  auto raw = periodic_adjoint_chains(evs[0].lambda);
  auto norm = normalize_against(evs[0].chains, raw, pairing);
  return {evs[0].chains, norm};
}

/// Normalized angle adjoint at a simple eigenvalue.
struct AngleFixture {
  JordanChainSet primal;
  std::vector<AdjointChain> adjoint;
};

AngleFixture angle_pair(const AnglePencil& p, Complex lam) {
  AngleFixture fx;
  fx.primal = jordan_chains(p, lam);
  AdjointTriple raw = adjoint_eigenvector(p, lam);
  PairingProvider pairing(p, lam);
  fx.adjoint = normalize_against(fx.primal.chains, {AdjointChain{lam, {raw}}}, pairing);
  return fx;
}

} // namespace

TEST_CASE("c2 functional: biorthogonal recovery at lambda2 = i") {
  auto [chains, adjoint] = periodic_pair(1);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u_a = power_solution(evs[0], 0, 0); // r^{-1} e^{i w}
  PowerSolution u_b = power_solution(evs[0], 0, 1); // r^{-1} e^{-i w}
  Cutoff eta2(0.3, 0.9);

  FieldFn ua = [&](double w, double r) { return u_a.eval(w, r); };
  auto c = extract_c2_functional(ua, adjoint, eta2);
  REQUIRE(c.size() == 2);
  CHECK(std::abs(c[0][0] - Complex(1.0)) < 2e-6);
  CHECK(std::abs(c[1][0]) < 2e-6);

  FieldFn mix = [&](double w, double r) {
    return 3.5 * u_a.eval(w, r) - 2.0 * kI * u_b.eval(w, r);
  };
  auto cm = extract_c2_functional(mix, adjoint, eta2);
  CHECK(std::abs(cm[0][0] - Complex(3.5)) < 1e-5);
  CHECK(std::abs(cm[1][0] - (-2.0 * kI)) < 1e-5);

  // a purely smooth field carries no singular content
  FieldFn smooth = [](double w, double r) {
    Complex z = r * std::exp(kI * w);
    return z * z + 0.3 * std::conj(z);
  };
  auto cs = extract_c2_functional(smooth, adjoint, eta2);
  CHECK(std::abs(cs[0][0]) < 1e-6);
  CHECK(std::abs(cs[1][0]) < 1e-6);
}

TEST_CASE("c2 functional: log chain at lambda2 = 0") {
  auto [chains, adjoint] = periodic_pair(0);
  auto evs = periodic_eigendata(-0.5, 0.5);
  PowerSolution u0 = power_solution(evs[0], 0, 0); // 1
  PowerSolution u1 = power_solution(evs[0], 1, 0); // i ln r
  Cutoff eta2(0.3, 0.9);
  Complex c0(2.0, 0.0), c1(1.0, 1.0);
  FieldFn u = [&](double w, double r) { return c0 * u0.eval(w, r) + c1 * u1.eval(w, r); };
  auto c = extract_c2_functional(u, adjoint, eta2);
  REQUIRE(c.size() == 1);
  REQUIRE(c[0].size() == 2);
  CHECK(std::abs(c[0][0] - c0) < 1e-6);
  CHECK(std::abs(c[0][1] - c1) < 1e-6);
}

TEST_CASE("c2 functional: annulus must resolve the cutoff transition") {
  auto [chains, adjoint] = periodic_pair(1);
  Cutoff eta2(0.3, 0.9);
  FieldFn u = [](double, double) { return Complex(0.0); };
  CHECK_THROWS_AS(extract_c2_functional(u, adjoint, eta2, {}, nullptr, 0.5, 2.0),
                  ResolutionError);
  QuadratureSpec thin;
  thin.n_radial = 4;
  CHECK_THROWS_AS(extract_c2_functional(u, adjoint, eta2, thin), ResolutionError);
}

TEST_CASE("c1 functional: vertex coefficients after the u12 correction") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  AngleFixture fx = angle_pair(p, lam1);
  PowerSolution u1 = power_solution(fx.primal, 0, 0, Pole::G1);

  // coupled part from the lambda2 = i family
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u2a = power_solution(evs[0], 0, 0);
  PowerSolution u2b = power_solution(evs[0], 0, 1);
  Coupling cpl{Complex(1.0), 0.0, 0};
  U12Solution u12a = solve_u12(p, build_f12(u2a, cpl.e1, cpl.theta_star, cpl.m_row));
  U12Solution u12b = solve_u12(p, build_f12(u2b, cpl.e1, cpl.theta_star, cpl.m_row));
  std::vector<std::vector<Complex>> c2{{Complex(1.0)}, {Complex(0.0)}};
  std::vector<std::vector<PowerSolution>> u12{{u12a.u}, {u12b.u}};
  Cutoff eta1(0.3, 0.9);

  FieldFn u = [&](double w, double r) { return u1.eval(w, r) + u12a.u.eval(w, r); };
  auto c = extract_c1_functional(p, u, c2, u12, fx.adjoint, eta1);
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c[0][0] - Complex(1.0)) < 1e-5);

  // u = u12 only: after subtraction there is no singular content left
  FieldFn uo = [&](double w, double r) { return u12a.u.eval(w, r); };
  auto c0 = extract_c1_functional(p, uo, c2, u12, fx.adjoint, eta1);
  CHECK(std::abs(c0[0][0]) < 1e-5);

  // sensitivity to a mis-supplied c2 is linear
  std::vector<std::vector<Complex>> c2_d1{{Complex(1.0) + Complex(1e-3)}, {Complex(0.0)}};
  std::vector<std::vector<Complex>> c2_d2{{Complex(1.0) + Complex(2e-3)}, {Complex(0.0)}};
  auto cd1 = extract_c1_functional(p, u, c2_d1, u12, fx.adjoint, eta1);
  auto cd2 = extract_c1_functional(p, u, c2_d2, u12, fx.adjoint, eta1);
  double move1 = std::abs(cd1[0][0] - c[0][0]);
  double move2 = std::abs(cd2[0][0] - c[0][0]);
  CHECK(move2 == doctest::Approx(2.0 * move1).epsilon(0.1));
  CHECK(move1 < 1e-3 * 10.0); // bounded by |delta| times the u12 pairing norm
}

TEST_CASE("cutoff independence of the functional route") {
  auto [chains, adjoint] = periodic_pair(1);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u_a = power_solution(evs[0], 0, 0);
  FieldFn u = [&](double w, double r) { return u_a.eval(w, r) + 0.25 * r * std::cos(w); };
  auto c_narrow = extract_c2_functional(u, adjoint, Cutoff(0.3, 0.6));
  auto c_wide = extract_c2_functional(u, adjoint, Cutoff(0.3, 1.2));
  CHECK(std::abs(c_narrow[0][0] - c_wide[0][0]) < 1e-4);
}

TEST_CASE("functional extraction is linear") {
  auto [chains, adjoint] = periodic_pair(1);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u_a = power_solution(evs[0], 0, 0);
  PowerSolution u_b = power_solution(evs[0], 0, 1);
  Cutoff eta2(0.3, 0.9);
  FieldFn f1 = [&](double w, double r) { return u_a.eval(w, r) + 0.2 * r; };
  FieldFn f2 = [&](double w, double r) { return u_b.eval(w, r) - 0.1 * r * r; };
  Complex alpha(0.7, -0.4), beta(1.3, 0.2);
  FieldFn combo = [&](double w, double r) { return alpha * f1(w, r) + beta * f2(w, r); };
  auto ca = extract_c2_functional(f1, adjoint, eta2);
  auto cb = extract_c2_functional(f2, adjoint, eta2);
  auto cc = extract_c2_functional(combo, adjoint, eta2);
  for (int z = 0; z < 2; ++z)
    CHECK(std::abs(cc[z][0] - (alpha * ca[z][0] + beta * cb[z][0])) < 1e-5);
}

TEST_CASE("fit extraction: exact representation, smooth background, noise") {
  AnglePencil p = nonlocal_example();
  AngleFixture fx = angle_pair(p, Complex(0.0, 4.0 / 3.0));
  PowerSolution u1 = power_solution(fx.primal, 0, 0, Pole::G1);

  FieldFn f = [&](double w, double r) { return 2.0 * u1.eval(w, r); };
  SampledField field = SampledField::sample(f, Pole::G1, p.b1(), p.b2(), 0.2, 1.4, 24, 24);
  FitResult res = extract_fit(field, {u1}, 2);
  CHECK(std::abs(res.coefficients[0] - Complex(2.0)) < 1e-8);

  FieldFn g = [&](double w, double r) {
    return u1.eval(w, r) + Complex(r * r * std::sin(2.0 * w));
  };
  SampledField field2 = SampledField::sample(g, Pole::G1, p.b1(), p.b2(), 0.2, 1.4, 24, 24);
  FitResult res2 = extract_fit(field2, {u1}, 2);
  CHECK(std::abs(res2.coefficients[0] - Complex(1.0)) < 1e-7);

  // noisy samples degrade gracefully
  std::vector<Complex> noisy = field2.values();
  testutil::rng().seed(11u);
  for (Complex& v : noisy) v += 1e-6 * testutil::random_complex(1.0);
  SampledField field3(Pole::G1, field2.omegas(), field2.radii(), noisy);
  FitResult res3 = extract_fit(field3, {u1}, 2);
  CHECK(std::abs(res3.coefficients[0] - Complex(1.0)) < 1e-4);
}

TEST_CASE("fit extraction guards") {
  AnglePencil p = nonlocal_example();
  AngleFixture fx = angle_pair(p, Complex(0.0, 4.0 / 3.0));
  PowerSolution u1 = power_solution(fx.primal, 0, 0, Pole::G1);
  FieldFn f = [&](double w, double r) { return u1.eval(w, r); };
  SampledField field = SampledField::sample(f, Pole::G1, p.b1(), p.b2(), 0.2, 1.4, 24, 24);
  // duplicated basis column: hopelessly ill-posed
  CHECK_THROWS_AS(extract_fit(field, {u1, u1}, 1), IllPosedFitError);
  // exponent collides with the smooth block
  PowerSolution clash{Complex(0.0, -1.0), {ExpPoly::sin_profile(1.0, 0.0, p.b1(), p.b2())},
                      Pole::G1};
  CHECK_THROWS_AS(extract_fit(field, {clash}, 2), InputError);
}

TEST_CASE("fit and functional routes agree on manufactured fields") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  AngleFixture fx = angle_pair(p, lam1);
  PowerSolution u1 = power_solution(fx.primal, 0, 0, Pole::G1);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u2a = power_solution(evs[0], 0, 0);
  PowerSolution u2b = power_solution(evs[0], 0, 1);
  Coupling cpl{Complex(1.0), 0.0, 0};
  U12Solution u12a = solve_u12(p, build_f12(u2a, cpl.e1, cpl.theta_star, cpl.m_row));
  U12Solution u12b = solve_u12(p, build_f12(u2b, cpl.e1, cpl.theta_star, cpl.m_row));
  Cutoff eta1(0.3, 0.9);

  testutil::rng().seed(23u);
  for (int trial = 0; trial < 4; ++trial) {
    Complex c1 = testutil::random_complex(1.5);
    Complex c2 = testutil::random_complex(1.5);
    FieldFn u = [&](double w, double r) {
      Complex z = r * std::exp(kI * w);
      return c1 * u1.eval(w, r) + c2 * u12a.u.eval(w, r) + 0.4 * z - 0.2 * std::conj(z) * std::conj(z);
    };
    std::vector<std::vector<Complex>> c2v{{c2}, {Complex(0.0)}};
    std::vector<std::vector<PowerSolution>> u12{{u12a.u}, {u12b.u}};
    auto cf = extract_c1_functional(p, u, c2v, u12, fx.adjoint, eta1);

    SampledField field = SampledField::sample(u, Pole::G1, p.b1(), p.b2(), 0.15, 1.2, 24, 24);
    FitResult fit = extract_fit(field, {u1, u12a.u}, 2);
    CHECK(std::abs(cf[0][0] - c1) < 1e-4);
    CHECK(std::abs(fit.coefficients[0] - c1) < 1e-6);
    CHECK(std::abs(fit.coefficients[1] - c2) < 1e-6);
    CHECK(std::abs(cf[0][0] - fit.coefficients[0]) < 1e-4);
  }
}

namespace {

A12Setup make_a12_setup(const AnglePencil& p, Complex lam1, const PowerSolution& u2,
                        const Coupling& cpl, bool resonant) {
  AngleFixture fx = angle_pair(p, lam1);
  SpecialRHS f12 = build_f12(u2, cpl.e1, cpl.theta_star, cpl.m_row);
  U12Solution u12 = solve_u12(p, f12, resonant);
  AdjointPowerSolution v1 = adjoint_power(p, fx.adjoint[0], 1);
  PeriodicPencil p2;
  AdjointPowerSolution v21 = solve_v21(p2, fx.adjoint[0].members[0], cpl, resonant);
  // distinct cutoff pairs: with identical cutoffs the two chart contributions
  // cancel identically and the trace is trivially zero
  return A12Setup{p, cpl, u2, u12.u, f12, v1, v21, Cutoff(0.5, 1.0), Cutoff(0.35, 0.7)};
}

} // namespace

TEST_CASE("A12 trace: distinct eigenvalues decay at the predicted rate") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u2 = power_solution(evs[0], 0, 0); // lambda2 = i
  Coupling cpl{Complex(1.0), 0.0, 0};
  A12Setup setup = make_a12_setup(p, lam1, u2, cpl, false);
  A12Result res = a12_trace(setup, {0.2, 0.1, 0.05, 0.025});
  for (size_t i = 1; i < res.values.size(); ++i)
    CHECK(std::abs(res.values[i]) < std::abs(res.values[i - 1]));
  CHECK(std::abs(res.limit) < 1e-3);
  // |A12(eps)| ~ eps^{Im(lam1 - lam2)} = eps^{1/3}
  CHECK(std::abs(res.loglog_slope - 1.0 / 3.0) < 0.05 / 3.0);
  CHECK_FALSE(res.diverged);
}

TEST_CASE("A12 trace: zero coupling vanishes identically") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u2 = power_solution(evs[0], 0, 0);
  Coupling cpl{Complex(0.0), 0.0, 0};
  A12Setup setup = make_a12_setup(p, lam1, u2, cpl, false);
  A12Result res = a12_trace(setup, {0.2, 0.1, 0.05, 0.025});
  for (const Complex& v : res.values) CHECK(std::abs(v) < 1e-12);
  CHECK(std::abs(res.limit) < 1e-12);
}

TEST_CASE("A12 trace: resonant coincidence has a finite nonzero limit") {
  // e2 = 0.6: lambda = 2i stays an eigenvalue of the angle pencil (simple) and
  // its gamma1 adjoint weight is nonzero, so the coupling genuinely resonates
  AnglePencil p = nonlocal_example(Complex(0.6));
  Complex lam(0.0, 2.0);
  auto evs = periodic_eigendata(1.5, 2.5);
  PowerSolution u2 = power_solution(evs[0], 0, 0); // e^{2 i w}
  Coupling cpl{Complex(1.0), 0.0, 0};
  A12Setup setup = make_a12_setup(p, lam, u2, cpl, true);
  A12Result res = a12_trace(setup, {0.2, 0.1, 0.05, 0.025});
  // Richardson-style stabilization: the last two values agree tightly
  Complex v2 = res.values[res.values.size() - 2], v3 = res.values.back();
  CHECK(std::abs(v3 - v2) < 1e-4 * std::abs(v3));
  CHECK(std::abs(res.limit) > 1e-4);
  CHECK(std::abs(res.limit - v3) < 1e-3 * std::abs(v3));
}

TEST_CASE("theorem-6.1 model route: manufactured round trip") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  AngleFixture fx1 = angle_pair(p, lam1);
  auto [chains2, adjoint2] = periodic_pair(1);
  auto evs = periodic_eigendata(0.5, 1.5);
  PowerSolution u1 = power_solution(fx1.primal, 0, 0, Pole::G1);
  PowerSolution u2 = power_solution(evs[0], 0, 0);
  Coupling cpl{Complex(1.0), 0.0, 0};
  SpecialRHS f12 = build_f12(u2, cpl.e1, cpl.theta_star, cpl.m_row);
  U12Solution u12 = solve_u12(p, f12);
  PeriodicPencil per;
  AdjointPowerSolution v21 = solve_v21(per, fx1.adjoint[0].members[0], cpl);

  Complex c1_true(1.0), c2_true(2.0);
  CompositeSingular comp = composite(p, cpl, c1_true, c2_true, u1, u2, u12.u,
                                     Cutoff(0.25, 0.5), Cutoff(0.25, 0.5), 10.0);
  ModelData data = data_from_composite(comp);

  Theorem61Result res = theorem61_model(p, fx1.adjoint, adjoint2, v21, data, Complex(0.0));
  REQUIRE(res.c2.size() == 2);
  CHECK(std::abs(res.c2[0][0] - c2_true) < 1e-4);
  CHECK(std::abs(res.c2[1][0]) < 1e-4);
  REQUIRE(res.c1.size() == 1);
  CHECK(std::abs(res.c1[0][0] - c1_true) < 1e-4);

  // zero data, zero coefficients
  ModelData zero;
  zero.f_g1 = [](double, double) { return Complex(0.0); };
  zero.f_g2 = [](double, double) { return Complex(0.0); };
  zero.f_row1 = [](double) { return Complex(0.0); };
  zero.f_row2 = [](double) { return Complex(0.0); };
  zero.support_r_min = 0.1;
  zero.support_r_max = 0.6;
  Theorem61Result rz = theorem61_model(p, fx1.adjoint, adjoint2, v21, zero, Complex(0.0));
  CHECK(std::abs(rz.c1[0][0]) < 1e-12);
  CHECK(std::abs(rz.c2[0][0]) < 1e-12);

  CHECK_THROWS_AS(
      theorem61_model(p, fx1.adjoint, adjoint2, v21, data, Complex(0.0), QuadratureSpec{}, 1),
      CapabilityError);
}
