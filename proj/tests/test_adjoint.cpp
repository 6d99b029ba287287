#include <doctest.h>

#include "pencil/adjoint.hpp"
#include "pencil/quadrature.hpp"

#include <functional>
#include "test_helpers.hpp"

using namespace pencil;

namespace {

AnglePencil dirichlet_pencil(double b2) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, std::nullopt};
  return AnglePencil(0.0, b2, lower, upper);
}

AnglePencil nonlocal_example(Complex e2 = Complex(1.0), double beta2 = 1.0,
                             double shift = -kPi / 2.0) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  NonlocalTerm t;
  t.e = e2;
  t.shift = shift;
  t.beta = beta2;
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  return AnglePencil(0.0, kPi, lower, upper);
}

// double eigenvalue configuration (row2 evaluates at angle 1):
// det = [sinh(pi z) + e sinh(z)]/z has an exact double zero here
const Complex kDoubleLambda(0.0, 1.4920015392549211);
const Complex kDoubleE(1.0027956884672706, 0.0);

AnglePencil double_root_pencil() { return nonlocal_example(kDoubleE, 1.0, 1.0 - kPi); }

ExpPoly random_test_profile(const AnglePencil& p) {
  std::vector<ExpTerm> terms;
  for (int t = 0; t < 3; ++t)
    terms.push_back(ExpTerm{testutil::random_complex(1.0),
                            Complex(testutil::uniform(-0.6, 0.6), testutil::uniform(-2.0, 2.0)),
                            t % 2});
  return ExpPoly(terms, p.b1(), p.b2());
}

} // namespace

TEST_CASE("adjoint eigenvector: self-adjoint local Dirichlet corner") {
  AnglePencil p = dirichlet_pencil(1.5 * kPi);
  Complex lam(0.0, 2.0 / 3.0);
  AdjointTriple tr = adjoint_eigenvector(p, lam);
  // psi proportional to the conjugate primal eigenfunction sin(2w/3)
  Complex ratio = tr.psi.eval(1.0) / std::sin(2.0 / 3.0);
  for (double w : {0.4, 1.7, 3.1, 4.4})
    CHECK(std::abs(tr.psi.eval(w) - ratio * std::sin(2.0 * w / 3.0)) <
          1e-10 * std::max(1.0, std::abs(ratio)));
  // ledger: chi = (-psi'(b1), psi'(b2))
  PiecewiseExpPoly d = tr.psi.derivative();
  CHECK(std::abs(tr.chi[0] + d.eval_right(p.b1())) < 1e-12);
  CHECK(std::abs(tr.chi[1] - d.eval_left(p.b2())) < 1e-12);
  // defining kernel property against random smooth profiles
  PairingProvider pairing(p, lam);
  for (int i = 0; i < 5; ++i) {
    ExpPoly phi = random_test_profile(p);
    CHECK(std::abs(pairing.d_pairing(0, phi, tr)) < 1e-9 * std::max(1.0, phi.sup_sample()));
  }
}

TEST_CASE("adjoint eigenvector: worked nonlocal configuration") {
  AnglePencil p = nonlocal_example();
  Complex lam(0.0, 4.0 / 3.0);
  AdjointTriple tr = adjoint_eigenvector(p, lam);
  REQUIRE(tr.psi.pieces().size() == 2);
  double c = kPi / 2.0;
  // continuity and the jump ledger [psi'] = -conj(e2) chi2
  CHECK(std::abs(tr.psi.eval_left(c) - tr.psi.eval_right(c)) < 1e-10);
  PiecewiseExpPoly d = tr.psi.derivative();
  Complex jump = d.eval_right(c) - d.eval_left(c);
  CHECK(std::abs(jump + std::conj(Complex(1.0)) * tr.chi[1]) < 1e-10);
  // kernel property
  PairingProvider pairing(p, lam);
  for (int i = 0; i < 5; ++i) {
    ExpPoly phi = random_test_profile(p);
    CHECK(std::abs(pairing.d_pairing(0, phi, tr)) < 1e-9 * std::max(1.0, phi.sup_sample()));
  }
}

TEST_CASE("adjoint eigenvector: trivial kernel off the spectrum") {
  AnglePencil p = nonlocal_example();
  CHECK_THROWS_AS(adjoint_eigenvector(p, Complex(0.3, 0.9)), MultiplicityError);
}

TEST_CASE("transmission determinant vanishes together with the characteristic one") {
  AnglePencil p = nonlocal_example();
  std::vector<double> eigen_ims{4.0 / 3.0, 2.0};
  // scan 50 points on the imaginary axis segment
  for (int i = 0; i < 50; ++i) {
    double im = 0.31 + (2.57 - 0.31) * i / 49.0;
    Complex lam(0.0, im);
    double det_rel = std::abs(char_det(p, lam));
    double near = 1e300;
    for (double e : eigen_ims) near = std::min(near, std::abs(im - e));
    double smin = transmission_smin(p, lam);
    bool det_small = det_rel < 1e-6;
    bool tr_small = smin < 1e-6;
    CHECK(det_small == tr_small);
    if (near > 0.05) {
      CHECK_FALSE(det_small);
      CHECK_FALSE(tr_small);
    }
  }
  for (double e : eigen_ims) {
    CHECK(std::abs(char_det(p, Complex(0.0, e))) < 1e-8);
    CHECK(transmission_smin(p, Complex(0.0, e)) < 1e-8);
  }
}

TEST_CASE("normalization: simple eigenvalue, full pairing becomes exactly 1") {
  AnglePencil p = nonlocal_example();
  Complex lam(0.0, 4.0 / 3.0);
  JordanChainSet primal = jordan_chains(p, lam);
  AdjointTriple raw = adjoint_eigenvector(p, lam);
  PairingProvider pairing(p, lam);
  AdjointChain chain{lam, {raw}};
  auto normalized = normalize_against(primal.chains, {chain}, pairing);
  CHECK(norm_pattern_residual(primal.chains, normalized, pairing) < 1e-10);
  // with beta = 1 the reduced pairing <-2 l phi, psi> coincides with the full one
  Complex red = reduced_pairing(lam, primal.chains[0].profiles[0], normalized[0].members[0]);
  CHECK(std::abs(red - Complex(1.0)) < 1e-10);

  // idempotence
  auto again = normalize_against(primal.chains, normalized, pairing);
  for (double w : {0.3, 1.2, 2.8})
    CHECK(std::abs(again[0].members[0].psi.eval(w) - normalized[0].members[0].psi.eval(w)) <
          1e-12);
}

TEST_CASE("cross-eigenvalue pairing vanishes for distinct eigenvalues") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0), lam2(0.0, 2.0);
  JordanChainSet primal1 = jordan_chains(p, lam1);
  JordanChainSet primal2 = jordan_chains(p, lam2);
  AdjointTriple raw2 = adjoint_eigenvector(p, lam2);
  PairingProvider pairing2(p, lam2);
  auto norm2 = normalize_against(primal2.chains, {AdjointChain{lam2, {raw2}}}, pairing2);
  // the d_lambda L-type form pairs the lam1 eigenfunction against the lam2 triple
  PairingProvider pairing1(p, lam1);
  Complex cross = pairing1.d_pairing(1, primal1.chains[0].profiles[0], norm2[0].members[0]);
  CHECK(std::abs(cross) < 1e-8);
}

TEST_CASE("full pairing is authoritative when the dilation is nontrivial") {
  AnglePencil p = nonlocal_example(Complex(1.0), 2.0);
  auto eigs = find_eigenvalues(p, WeightStrip::from_im_bounds(0.4, 2.3, 0, 1, true), 4.0);
  REQUIRE(!eigs.empty());
  Complex lam = eigs[0].lambda;
  JordanChainSet primal = jordan_chains(p, lam);
  REQUIRE(primal.chains.size() == 1);
  AdjointTriple raw = adjoint_eigenvector(p, lam);
  PairingProvider pairing(p, lam);
  auto normalized = normalize_against(primal.chains, {AdjointChain{lam, {raw}}}, pairing);
  CHECK(norm_pattern_residual(primal.chains, normalized, pairing) < 1e-9);
  Complex red = reduced_pairing(lam, primal.chains[0].profiles[0], normalized[0].members[0]);
  // the boundary ln(beta) derivative term makes the reduced form differ from 1
  CHECK(std::abs(red - Complex(1.0)) > 1e-3);
}

TEST_CASE("length-2 chain at an exact double eigenvalue, fully normalized") {
  AnglePencil p = double_root_pencil();
  SmithData smith = local_smith(p, kDoubleLambda);
  CHECK(smith.det_order == 2);
  REQUIRE(smith.partial.size() == 1);
  CHECK(smith.partial[0] == 2);

  JordanChainSet primal = jordan_chains(p, kDoubleLambda);
  REQUIRE(primal.chains.size() == 1);
  REQUIRE(primal.chains[0].length() == 2);
  CHECK(chain_residual(p, primal) < 1e-8);

  AdjointTriple eigen = adjoint_eigenvector(p, kDoubleLambda);
  AdjointChain chain = adjoint_chain2(p, kDoubleLambda, eigen);
  PairingProvider pairing(p, kDoubleLambda);
  // chain property of the associate: <L phi, Psi1> + <dL phi, Psi0> = 0
  for (int i = 0; i < 5; ++i) {
    ExpPoly phi = random_test_profile(p);
    Complex v = pairing.d_pairing(0, phi, chain.members[1]) +
                pairing.d_pairing(1, phi, chain.members[0]);
    CHECK(std::abs(v) < 1e-8 * std::max(1.0, phi.sup_sample()));
  }
  auto normalized = normalize_against(primal.chains, {chain}, pairing);
  CHECK(norm_pattern_residual(primal.chains, normalized, pairing) < 1e-8);
}

TEST_CASE("periodic adjoint chains: delta pattern at lambda = 0 and lambda = i n") {
  // lambda = 0: one chain of length 2
  auto evs0 = periodic_eigendata(-0.5, 0.5);
  PairingProvider pairing0(Complex(0.0));
  auto raw0 = periodic_adjoint_chains(Complex(0.0));
  auto norm0 = normalize_against(evs0[0].chains, raw0, pairing0);
  CHECK(norm_pattern_residual(evs0[0].chains, norm0, pairing0) < 1e-8);
  // normalized eigen-density is the constant -1/(2 pi)
  for (double w : {0.3, 2.0, 5.5})
    CHECK(std::abs(norm0[0].members[0].psi.eval(w) - Complex(-1.0 / (2.0 * kPi))) < 1e-12);

  // lambda = i: two rotating chains
  auto evs1 = periodic_eigendata(0.5, 1.5);
  PairingProvider pairing1(Complex(0.0, 1.0));
  auto raw1 = periodic_adjoint_chains(Complex(0.0, 1.0));
  auto norm1 = normalize_against(evs1[0].chains, raw1, pairing1);
  CHECK(norm_pattern_residual(evs1[0].chains, norm1, pairing1) < 1e-8);
}

TEST_CASE("adjoint power solutions: exponent bookkeeping") {
  AnglePencil p = nonlocal_example();
  Complex lam(0.0, 4.0 / 3.0);
  JordanChainSet primal = jordan_chains(p, lam);
  AdjointTriple raw = adjoint_eigenvector(p, lam);
  PairingProvider pairing(p, lam);
  auto normalized = normalize_against(primal.chains, {AdjointChain{lam, {raw}}}, pairing);
  AdjointPowerSolution v = adjoint_power(p, normalized[0], 1);
  // m = 1: density exponent i conj(lambda) + 0; order-0 rows: weights i conj(lambda) - 1
  CHECK(std::abs(v.density_exponent() - kI * std::conj(lam)) < 1e-15);
  CHECK(std::abs(v.weight_exponent(0) - (kI * std::conj(lam) - 1.0)) < 1e-15);
  // scaling law of the density member
  for (double r : {0.4, 1.7}) {
    Complex expect = std::exp(v.density_exponent() * std::log(r)) * v.psi[0].eval(1.0);
    CHECK(std::abs(v.eval(0, 1.0, r) - expect) < 1e-13 * std::max(1.0, std::abs(expect)));
  }

  // periodic conjugate of lambda2 = i gives v2 = r * psi2
  auto raw1 = periodic_adjoint_chains(Complex(0.0, 1.0));
  AdjointPowerSolution v2 = adjoint_power(raw1[0], 1);
  CHECK(std::abs(v2.density_exponent() - Complex(1.0)) < 1e-15);

  // conjugate chain at lambda = 0 carries the i ln r member
  auto raw0 = periodic_adjoint_chains(Complex(0.0));
  AdjointPowerSolution v0 = adjoint_power(raw0[0], 1);
  CHECK(std::abs(v0.eval(1, 0.7, 2.5) - (kI * std::log(2.5)) * v0.psi[0].eval(0.7) -
                 v0.psi[1].eval(0.7)) < 1e-13);
}

namespace {

/// Quadrature residual of the defining weak identity of v21:
/// <Lap u, v21> + e1 int u(theta, r) conj(chi r^{i conj(l1) - 1}) dr over
/// compactly supported smooth test fields u = B(r) T(w).
double v21_weak_residual(const AdjointPowerSolution& v21, const Coupling& cpl,
                         const AdjointTriple& triple1, int n_tests) {
  double worst = 0.0;
  Complex mu = std::conj(triple1.lambda0);
  for (int t = 0; t < n_tests; ++t) {
    double r0 = std::exp(testutil::uniform(-1.5, -0.3));
    double r1 = r0 * std::exp(testutil::uniform(1.0, 2.0));
    Cutoff rise(r0, r0 * 1.4), fall(r1 / 1.4, r1);
    Complex c0 = testutil::random_complex(1.0), c1 = testutil::random_complex(1.0),
            c2 = testutil::random_complex(1.0);
    auto T = [&](double w) {
      return c0 + c1 * std::exp(kI * w) + c2 * std::exp(-2.0 * kI * w);
    };
    auto Tpp = [&](double w) {
      return -c1 * std::exp(kI * w) - 4.0 * c2 * std::exp(-2.0 * kI * w);
    };
    auto B = [&](double r) { return (1.0 - rise.value(r)) * fall.value(r); };
    auto Bp = [&](double r) {
      return -rise.dvalue(r) * fall.value(r) + (1.0 - rise.value(r)) * fall.dvalue(r);
    };
    auto Bpp = [&](double r) {
      return -rise.d2value(r) * fall.value(r) - 2.0 * rise.dvalue(r) * fall.dvalue(r) +
             (1.0 - rise.value(r)) * fall.d2value(r);
    };
    // radial quadrature split at the smoothstep knots (B is piecewise smooth)
    GaussLegendre glr(48), glw(64);
    std::vector<double> knots{r0, r0 * 1.4, r1 / 1.4, r1};
    double theta = cpl.theta_star;
    auto radial_nodes = [&](const std::function<Complex(double)>& f) {
      Complex acc(0.0);
      for (size_t s = 0; s + 1 < knots.size(); ++s) {
        double rm = 0.5 * (knots[s] + knots[s + 1]), rh = 0.5 * (knots[s + 1] - knots[s]);
        for (int i = 0; i < 48; ++i) acc += glr.weights[i] * rh * f(rm + rh * glr.nodes[i]);
      }
      return acc;
    };
    Complex lhs = radial_nodes([&](double r) {
      Complex ang(0.0);
      for (int seg = 0; seg < 2; ++seg) {
        double lo = seg == 0 ? theta : 0.0;
        double hi = seg == 0 ? 2.0 * kPi : theta;
        if (hi - lo < 1e-12) continue;
        double amid = 0.5 * (lo + hi), ahal = 0.5 * (hi - lo);
        for (int j = 0; j < 64; ++j) {
          double w = amid + ahal * glw.nodes[j];
          Complex lap = (Bpp(r) + Bp(r) / r) * T(w) + B(r) * Tpp(w) / (r * r);
          ang += glw.weights[j] * ahal * lap * std::conj(v21.eval_top(w, r));
        }
      }
      return r * ang;
    });
    // -e1 int u(theta, r) conj(chi r^{i mu - 1}) dr
    Complex rhs = radial_nodes([&](double r) {
      Complex w1 = triple1.chi[0] * std::exp((kI * mu - 1.0) * std::log(r));
      return B(r) * T(theta) * std::conj(w1);
    });
    rhs *= -cpl.e1;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

} // namespace

TEST_CASE("v21: non-resonant coupling satisfies the weak identity") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 4.0 / 3.0);
  JordanChainSet primal = jordan_chains(p, lam1);
  AdjointTriple raw = adjoint_eigenvector(p, lam1);
  PairingProvider pairing(p, lam1);
  auto normalized = normalize_against(primal.chains, {AdjointChain{lam1, {raw}}}, pairing);
  Coupling cpl{Complex(1.0, 0.5), 0.7, 0};
  PeriodicPencil p2;
  AdjointPowerSolution v21 = solve_v21(p2, normalized[0].members[0], cpl);
  CHECK(v21.log_degree() == 0);
  CHECK(v21_weak_residual(v21, cpl, normalized[0].members[0], 6) < 1e-6);
}

TEST_CASE("v21: zero coupling gives the zero density") {
  AnglePencil p = nonlocal_example();
  AdjointTriple raw = adjoint_eigenvector(p, Complex(0.0, 4.0 / 3.0));
  PeriodicPencil p2;
  AdjointPowerSolution v = solve_v21(p2, raw, Coupling{Complex(0.0), 0.0, 0});
  CHECK(v.psi[0].sup_sample() == 0.0);
}

TEST_CASE("v21: resonant conjugate eigenvalue needs (and gets) the log extension") {
  AnglePencil p = nonlocal_example();
  Complex lam1(0.0, 2.0); // conj(2i) = -2i sits in the periodic spectrum
  JordanChainSet primal = jordan_chains(p, lam1);
  AdjointTriple raw = adjoint_eigenvector(p, lam1);
  PairingProvider pairing(p, lam1);
  auto normalized = normalize_against(primal.chains, {AdjointChain{lam1, {raw}}}, pairing);
  Coupling cpl{Complex(0.8, -0.2), 0.4, 0};
  PeriodicPencil p2;
  CHECK_THROWS_AS(solve_v21(p2, normalized[0].members[0], cpl, false), ResonanceError);
  AdjointPowerSolution v21 = solve_v21(p2, normalized[0].members[0], cpl, true);
  CHECK(v21.log_degree() == 1);
  CHECK(v21_weak_residual(v21, cpl, normalized[0].members[0], 6) < 1e-6);
}

TEST_CASE("adjoint capability limits") {
  // first-order nonlocal trace is out of scope for the transmission ledger
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  NonlocalTerm t;
  t.e = 1.0;
  t.shift = -kPi / 2.0;
  t.tau = {Complex(0.0), Complex(1.0)};
  t.order = 1;
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  AnglePencil p(0.0, kPi, lower, upper);
  CHECK_THROWS_AS(adjoint_eigenvector(p, Complex(0.0, 1.0)), CapabilityError);
}
