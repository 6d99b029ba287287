#pragma once

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pencil/workspace.hpp"
#include "pencil/sectorfd.hpp"

namespace pencil {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline AnglePencil worked_pencil(Complex e2 = Complex(1.0)) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  NonlocalTerm t;
  t.e = e2;
  t.shift = -kPi / 2.0;
  t.beta = 1.0;
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, t};
  return AnglePencil(0.0, kPi, lower, upper);
}

inline AnglePencil dirichlet_pencil(double b2) {
  BoundaryRow lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  BoundaryRow upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, std::nullopt};
  return AnglePencil(0.0, b2, lower, upper);
}

inline ProblemConfig worked_config() {
  ProblemConfig cfg;
  cfg.b1 = 0.0;
  cfg.b2 = kPi;
  NonlocalTerm t;
  t.e = Complex(1.0);
  t.shift = -kPi / 2.0;
  t.beta = 1.0;
  cfg.row_upper.nonlocal = t;
  cfg.coupling = Coupling{Complex(1.0), 0.0, 0};
  cfg.lambda2 = Complex(0.0, 1.0);
  cfg.weight = WeightStrip::from_im_bounds(1.0, 1.9);
  return cfg;
}

struct Checker {
  bool ok = true;
  std::ostringstream log;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      log << (log.str().empty() ? "" : "; ") << what;
    }
  }
};

inline CriterionResult run_criterion(int id, const std::string& name,
                                     const std::function<void(Checker&)>& body) {
  CriterionResult res;
  res.id = id;
  res.name = name;
  auto t0 = std::chrono::steady_clock::now();
  Checker chk;
  try {
    body(chk);
    res.pass = chk.ok;
    res.detail = chk.ok ? "ok" : chk.log.str();
  } catch (const std::exception& e) {
    res.pass = false;
    res.detail = std::string("exception: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace verify_detail

/// Criterion 1: local Dirichlet spectrum of the 3 pi / 2 corner.
inline CriterionResult criterion_local_dirichlet_spectrum() {
  using namespace verify_detail;
  return run_criterion(1, "local Dirichlet corner spectrum", [](Checker& chk) {
    AnglePencil p = dirichlet_pencil(1.5 * kPi);
    auto eigs = find_eigenvalues(p, WeightStrip::from_im_bounds(0.1, 3.0, 0, 1, true), 10.0);
    chk.require(eigs.size() == 4, "expected exactly four eigenvalues");
    for (size_t k = 0; k < eigs.size(); ++k) {
      Complex exact(0.0, 2.0 * (k + 1) / 3.0);
      chk.require(std::abs(eigs[k].lambda - exact) < 1e-10,
                  "eigenvalue " + std::to_string(k + 1) + " off by more than 1e-10");
      chk.require(eigs[k].multiplicity == 1, "unexpected multiplicity");
    }
  });
}

/// Criterion 2: the worked nonlocal spectrum through the sinh factorization.
inline CriterionResult criterion_nonlocal_spectrum() {
  using namespace verify_detail;
  return run_criterion(2, "nonlocal factorized spectrum", [](Checker& chk) {
    AnglePencil p = worked_pencil();
    auto eigs = find_eigenvalues(p, WeightStrip::from_im_bounds(1.0, 4.5, 0, 1, true), 10.0);
    std::vector<double> expected{4.0 / 3.0, 2.0, 8.0 / 3.0, 4.0};
    chk.require(eigs.size() == expected.size(), "expected four eigenvalues");
    for (size_t k = 0; k < eigs.size() && k < expected.size(); ++k) {
      chk.require(std::abs(eigs[k].lambda - Complex(0.0, expected[k])) < 1e-9,
                  "eigenvalue " + std::to_string(k + 1) + " off by more than 1e-9");
      JordanChainSet set = jordan_chains(p, eigs[k].lambda);
      chk.require(chain_residual(p, set) < 1e-8, "eigenfunction row residual exceeds 1e-8");
    }
  });
}

/// Criterion 3: periodic pencil chains and their annihilation residuals.
inline CriterionResult criterion_periodic_chains() {
  using namespace verify_detail;
  return run_criterion(3, "periodic pencil chains", [](Checker& chk) {
    auto evs = periodic_eigendata(-3.5, 3.5);
    chk.require(evs.size() == 7, "expected lambda = i n, n = -3..3");
    PeriodicPencil per;
    for (const auto& ev : evs) {
      int n = static_cast<int>(std::lround(ev.lambda.imag()));
      if (n == 0) {
        chk.require(ev.chains.size() == 1 && ev.chains[0].length() == 2,
                    "lambda = 0 must carry one chain of length 2");
        PowerSolution u0 = power_solution(ev, 0, 0);
        PowerSolution u1 = power_solution(ev, 1, 0);
        chk.require(std::abs(u0.eval(0.7, 2.0) - Complex(1.0)) < 1e-14, "u(0) must be 1");
        chk.require(std::abs(u1.eval(0.7, 2.0) - kI * std::log(2.0)) < 1e-14,
                    "u(1) must be i ln r");
        chk.require(residual(per, u0, {0.3, 1.0, 2.5}) == 0.0, "interior residual not exact");
        chk.require(residual(per, u1, {0.3, 1.0, 2.5}) == 0.0, "interior residual not exact");
      } else {
        chk.require(static_cast<int>(ev.chains.size()) == 2, "two rotating chains expected");
        for (int z = 0; z < 2; ++z) {
          PowerSolution u = power_solution(ev, 0, z);
          chk.require(residual(per, u, {0.3, 1.0, 2.5}) < 1e-10, "rotating-mode residual");
        }
      }
    }
  });
}

/// Criterion 4: strip multiplicity and additivity of the index jump.
inline CriterionResult criterion_kappa() {
  using namespace verify_detail;
  return run_criterion(4, "index-jump bookkeeping", [](Checker& chk) {
    AnglePencil p = worked_pencil();
    PeriodicPencil per;
    int k19 = kappa_report(WeightStrip::from_im_bounds(1.0, 1.9), p, per).kappa;
    int k15 = kappa_report(WeightStrip::from_im_bounds(0.5, 1.5, 0, 1, true), p, per).kappa;
    int k25 = kappa_report(WeightStrip::from_im_bounds(2.1, 2.5), p, per).kappa;
    chk.require(k19 == 1, "strip (1.0, 1.9) must give kappa = 1");
    chk.require(k15 == 2, "strip (0.5, 1.5) must give kappa = 2");
    chk.require(k25 == 0, "strip (2.1, 2.5) must give kappa = 0");
    int a = kappa_report(WeightStrip::from_im_bounds(0.5, 1.2), p, per).kappa;
    int b = kappa_report(WeightStrip::from_im_bounds(1.2, 1.5), p, per).kappa;
    chk.require(k15 == a + b, "kappa additivity over split strips failed");
  });
}

/// Criterion 5: the closed-form coupled particular solution.
inline CriterionResult criterion_u12() {
  using namespace verify_detail;
  return run_criterion(5, "coupled particular solution", [](Checker& chk) {
    AnglePencil p = worked_pencil();
    PowerSolution u2{Complex(0.0, -1.0), {ExpPoly::constant(1.0, 0.0, 2.0 * kPi)}, Pole::G2};
    SpecialRHS rhs = build_f12(u2, Complex(1.0), 0.0, 0);
    U12Solution sol = solve_u12(p, rhs);
    for (int i = 0; i < 100; ++i) {
      double w = kPi * ((i % 10) + 0.5) / 10.0;
      double r = 0.1 * (i / 10 + 1);
      Complex expect = -r * (std::cos(w) + std::sin(w));
      if (std::abs(sol.u.eval(w, r) - expect) >= 1e-10) {
        chk.require(false, "closed form -r (cos w + sin w) violated");
        break;
      }
    }
    // resonant mode at the eigenvalue 4i/3
    PowerSolution u2r{Complex(0.0, 4.0 / 3.0), {ExpPoly::constant(1.0, 0.0, 2.0 * kPi)},
                      Pole::G2};
    SpecialRHS rhs_r = build_f12(u2r, Complex(1.0), 0.0, 0);
    U12Solution res = solve_u12(p, rhs_r, true);
    chk.require(res.resonant && res.u.log_degree() >= 1, "resonant extension missing");
    chk.require(u12_residual(p, res.u, rhs_r, {0.3, 1.0, 2.4}) < 1e-8,
                "resonant residual exceeds 1e-8");
  });
}

/// Criterion 6: adjoint machinery end to end.
inline CriterionResult criterion_adjoint() {
  using namespace verify_detail;
  return run_criterion(6, "adjoint transmission and normalization", [](Checker& chk) {
    AnglePencil p = worked_pencil();
    // transmission zeros coincide with char_det zeros over a 50-point scan
    std::vector<double> eigen_ims{4.0 / 3.0, 2.0};
    for (int i = 0; i < 50; ++i) {
      double im = 0.31 + (2.57 - 0.31) * i / 49.0;
      Complex lam(0.0, im);
      bool det_small = std::abs(char_det(p, lam)) < 1e-6;
      bool tr_small = transmission_smin(p, lam) < 1e-6;
      chk.require(det_small == tr_small, "transmission/char-det zero sets disagree");
    }
    for (double e : eigen_ims) {
      chk.require(std::abs(char_det(p, Complex(0.0, e))) < 1e-8, "char det must vanish");
      chk.require(transmission_smin(p, Complex(0.0, e)) < 1e-8,
                  "transmission must vanish with char det");
    }
    // normalized pairing equals 1 to 1e-10
    Complex lam1(0.0, 4.0 / 3.0);
    JordanChainSet primal = jordan_chains(p, lam1);
    AdjointTriple raw = adjoint_eigenvector(p, lam1);
    PairingProvider pairing(p, lam1);
    auto normed = normalize_against(primal.chains, {AdjointChain{lam1, {raw}}}, pairing);
    chk.require(norm_pattern_residual(primal.chains, normed, pairing) < 1e-10,
                "normalized pairing differs from 1 by more than 1e-10");
    // cross-eigenvalue pairing
    Complex lam2(0.0, 2.0);
    JordanChainSet primal2 = jordan_chains(p, lam2);
    AdjointTriple raw2 = adjoint_eigenvector(p, lam2);
    PairingProvider pairing2(p, lam2);
    auto norm2 = normalize_against(primal2.chains, {AdjointChain{lam2, {raw2}}}, pairing2);
    Complex cross = pairing.d_pairing(1, primal.chains[0].profiles[0], norm2[0].members[0]);
    chk.require(std::abs(cross) < 1e-8, "cross-eigenvalue pairing exceeds 1e-8");
    // periodic lambda = 0 chain: full delta pattern
    auto evs0 = periodic_eigendata(-0.5, 0.5);
    PairingProvider pairing0(Complex(0.0));
    auto norm0 = normalize_against(evs0[0].chains, periodic_adjoint_chains(Complex(0.0)),
                                   pairing0);
    chk.require(norm_pattern_residual(evs0[0].chains, norm0, pairing0) < 1e-8,
                "periodic lambda = 0 delta pattern violated");
  });
}

/// Criterion 7: coefficient round trip by both extraction routes.
inline CriterionResult criterion_round_trip() {
  using namespace verify_detail;
  return run_criterion(7, "coefficient extraction round trip", [](Checker& chk) {
    ProblemConfig cfg = worked_config();
    CoupledWorkspace ws = build_workspace(cfg);
    Complex c1_true(1.0, 2.0), c2_true(-0.7, 0.0);

    FieldFn u_g1 = [&](double w, double r) {
      return c1_true * ws.u1.eval(w, r) + c2_true * ws.u12.u.eval(w, r);
    };
    FieldFn u_g2 = [&](double w, double r) {
      return c2_true * ws.u2_family.front().eval(w, r);
    };
    Cutoff eta1(0.3, 0.6), eta2(0.3, 0.6);
    auto c2_fun = extract_c2_functional(u_g2, ws.adjoint2, eta2);
    chk.require(std::abs(c2_fun[0][0] - c2_true) < 1e-4, "functional c2 misses 1e-4");
    chk.require(std::abs(c2_fun[1][0]) < 1e-4, "spurious second-mode c2");

    std::vector<std::vector<PowerSolution>> u12s{{ws.u12_family[0].u}, {ws.u12_family[1].u}};
    auto c1_fun = extract_c1_functional(ws.pencil, u_g1, c2_fun, u12s, ws.adjoint1, eta1);
    chk.require(std::abs(c1_fun[0][0] - c1_true) < 1e-4, "functional c1 misses 1e-4");

    SampledField field =
        SampledField::sample(u_g1, Pole::G1, ws.pencil.b1(), ws.pencil.b2(), 0.15, 1.2, 24, 24);
    FitResult fit = extract_fit(field, {ws.u1, ws.u12.u}, 2);
    chk.require(std::abs(fit.coefficients[0] - c1_true) < 1e-6, "fit c1 misses 1e-6");
    chk.require(std::abs(fit.coefficients[1] - c2_true) < 1e-6, "fit c2 misses 1e-6");

    // cutoff-radius doubling changes the functional coefficients below 1e-4
    auto c2_wide = extract_c2_functional(u_g2, ws.adjoint2, Cutoff(0.3, 1.2));
    auto c1_wide = extract_c1_functional(ws.pencil, u_g1, c2_wide, u12s, ws.adjoint1,
                                         Cutoff(0.3, 1.2));
    chk.require(std::abs(c2_wide[0][0] - c2_fun[0][0]) < 1e-4, "c2 cutoff dependence");
    chk.require(std::abs(c1_wide[0][0] - c1_fun[0][0]) < 1e-4, "c1 cutoff dependence");
  });
}

/// Criterion 8: the coupling-matrix trace and its vanishing limit.
inline CriterionResult criterion_a12() {
  using namespace verify_detail;
  return run_criterion(8, "coupling matrix trace", [](Checker& chk) {
    ProblemConfig cfg = worked_config();
    CoupledWorkspace ws = build_workspace(cfg);
    A12Setup setup{ws.pencil, ws.coupling, ws.u2_family.front(), ws.u12.u, ws.f12,
                   ws.v1, ws.v21, Cutoff(0.5, 1.0), Cutoff(0.35, 0.7)};
    A12Result res = a12_trace(setup, {0.2, 0.1, 0.05, 0.025});
    for (size_t i = 1; i < res.values.size(); ++i)
      chk.require(std::abs(res.values[i]) < std::abs(res.values[i - 1]),
                  "|A12(eps)| must decrease");
    chk.require(std::abs(res.limit) < 1e-3, "extrapolated limit must vanish below 1e-3");
    chk.require(std::abs(res.loglog_slope - 1.0 / 3.0) <= 0.05 * (1.0 / 3.0),
                "log-log slope misses Im(lambda1 - lambda2) = 1/3 by more than 5%");
  });
}

/// Criterion 9: finite-difference convergence ladder with extraction.
inline CriterionResult criterion_fd() {
  using namespace verify_detail;
  return run_criterion(9, "finite-difference ladder", [](Checker& chk) {
    ProblemConfig cfg = worked_config();
    CoupledWorkspace ws = build_workspace(cfg);
    FieldFn u_exact = [&](double w, double r) {
      return ws.u1.eval(w, r) + Complex(0.5 * r * r * std::cos(2.0 * w));
    };
    FieldFn lap = [](double, double) { return Complex(0.0); };
    MMSExtraction ext;
    ext.fit_basis = {ws.u1, ws.u12.u};
    ext.smooth_degree = 2;
    SectorGrid grid;
    grid.b1 = cfg.b1;
    grid.b2 = cfg.b2;
    grid.rho0 = -3.0;
    grid.rho1 = 0.5;
    MMSStudy study = mms_study(grid, Complex(1.0), -kPi / 2.0, 1.0, u_exact, lap,
                               {32, 64, 128}, ext);
    for (size_t i = 1; i < study.rows.size(); ++i) {
      chk.require(study.rows[i].observed_order > 1.7 && study.rows[i].observed_order < 2.3,
                  "observed order outside [1.7, 2.3]");
    }
    chk.require(std::abs(study.rows.back().fit_coefficients[0] - Complex(1.0)) < 1e-2,
                "extracted c1 from the finest grid misses 1e-2");
  });
}

struct VerificationSummary {
  std::vector<CriterionResult> results;
  bool all_pass = false;
  double total_seconds = 0.0;
};

/// Runs acceptance criteria 1-9; the tenth (total wall-clock budget and
/// overall pass) is recorded in the summary.
inline VerificationSummary run_verification() {
  VerificationSummary summary;
  summary.results.push_back(criterion_local_dirichlet_spectrum());
  summary.results.push_back(criterion_nonlocal_spectrum());
  summary.results.push_back(criterion_periodic_chains());
  summary.results.push_back(criterion_kappa());
  summary.results.push_back(criterion_u12());
  summary.results.push_back(criterion_adjoint());
  summary.results.push_back(criterion_round_trip());
  summary.results.push_back(criterion_a12());
  summary.results.push_back(criterion_fd());
  summary.all_pass = true;
  for (const CriterionResult& r : summary.results) {
    summary.all_pass = summary.all_pass && r.pass;
    summary.total_seconds += r.seconds;
  }
  CriterionResult overall;
  overall.id = 10;
  overall.name = "full suite within the time budget";
  overall.pass = summary.all_pass && summary.total_seconds < 180.0;
  overall.seconds = summary.total_seconds;
  overall.detail = summary.all_pass
                       ? (overall.pass ? "ok" : "exceeded the 180 s budget")
                       : "earlier criteria failed";
  summary.results.push_back(overall);
  summary.all_pass = summary.all_pass && overall.pass;
  return summary;
}

} // namespace pencil
