#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <vector>

#include "pencil/core.hpp"
#include "pencil/extract.hpp"
#include "pencil/parallel.hpp"

namespace pencil {

/// Log-polar tensor grid on the truncated sector: rho = ln r in
/// [rho0, rho1], omega in [b1, b2], uniform spacings.  In log-polar
/// coordinates the dilation of the nonlocal row becomes a translation, so
/// aligned configurations couple grid nodes exactly.
struct SectorGrid {
  double b1 = 0.0, b2 = kPi;
  double rho0 = -3.0, rho1 = 0.5;
  int n_rho = 64, n_omega = 64; // cell counts; nodes are counts + 1
  bool aligned = true;

  double drho() const { return (rho1 - rho0) / n_rho; }
  double domega() const { return (b2 - b1) / n_omega; }
  double rho(int j) const { return rho0 + j * drho(); }
  double omega(int i) const { return b1 + i * domega(); }
  int nodes() const { return (n_rho + 1) * (n_omega + 1); }
  int index(int i_omega, int j_rho) const { return i_omega * (n_rho + 1) + j_rho; }
};

/// Model problem data: Lap u = f in the sector, u = g1 on the lower arm,
/// u + e2 u(G2 y) = g2 on the upper arm, Dirichlet closures at the radial
/// truncation (and for dilation shifts leaving the grid).
struct SectorProblem {
  Complex e2{0.0};
  double omega2 = 0.0;
  double beta2 = 1.0;
  FieldFn f;          // interior data (physical Laplacian of the solution)
  RayFn g1;           // data on omega = b1, function of r
  RayFn g2;           // nonlocal row data on omega = b2, function of r
  FieldFn closure;    // trace supplied on truncation boundaries / out-of-range shifts
};

struct SectorSystem {
  SectorGrid grid;
  Eigen::SparseMatrix<Complex> matrix;
  Vector rhs;
};

/// Assemble the 5-point scheme with the nonlocal boundary row.  The angular
/// shift must align with the grid; the radial shift aligns in aligned mode
/// and is closed with cubic interpolation otherwise.
inline SectorSystem assemble(const SectorGrid& grid, const SectorProblem& prob) {
  const double dr = grid.drho(), dw = grid.domega();
  const int nr = grid.n_rho, nw = grid.n_omega;
  const double shift_cells_w = prob.omega2 / dw;
  const int jw_shift = static_cast<int>(std::lround(shift_cells_w));
  if (prob.e2 != Complex(0.0)) {
    if (std::abs(shift_cells_w - jw_shift) > 1e-9)
      throw ConfigError("sector grid: omega2 must align with the angular grid");
    int target = nw + jw_shift;
    if (target <= 0 || target >= nw)
      throw ConfigError("sector grid: shifted ray must fall strictly inside the sector");
  }
  const double shift_cells_r = std::log(prob.beta2) / dr;
  const int jr_shift = static_cast<int>(std::lround(shift_cells_r));
  const bool radial_aligned = std::abs(shift_cells_r - jr_shift) < 1e-9;
  if (grid.aligned && prob.e2 != Complex(0.0) && !radial_aligned)
    throw ConfigError("sector grid: ln(beta2) must align with the radial grid in aligned mode");

  std::vector<Eigen::Triplet<Complex>> trip;
  Vector rhs = Vector::Zero(grid.nodes());

  auto node_r = [&](int j) { return std::exp(grid.rho(j)); };

  for (int i = 0; i <= nw; ++i) {
    for (int j = 0; j <= nr; ++j) {
      int row = grid.index(i, j);
      double w = grid.omega(i), rho = grid.rho(j), r = node_r(j);
      if (j == 0 || j == nr) { // radial truncation closures
        trip.emplace_back(row, row, Complex(1.0));
        rhs(row) = prob.closure(w, r);
        continue;
      }
      if (i == 0) { // lower arm Dirichlet
        trip.emplace_back(row, row, Complex(1.0));
        rhs(row) = prob.g1(r);
        continue;
      }
      if (i == nw) { // nonlocal row
        trip.emplace_back(row, row, Complex(1.0));
        rhs(row) = prob.g2(r);
        if (prob.e2 != Complex(0.0)) {
          int ti = nw + jw_shift;
          double target_rho = rho + std::log(prob.beta2);
          if (radial_aligned) {
            int tj = j + jr_shift;
            if (tj >= 0 && tj <= nr) {
              trip.emplace_back(row, grid.index(ti, tj), prob.e2);
            } else {
              rhs(row) -= prob.e2 * prob.closure(grid.omega(ti), std::exp(target_rho));
            }
          } else {
            // cubic Lagrange in rho on the 4 nearest layers
            double gj = (target_rho - grid.rho0) / dr;
            int base = std::clamp(static_cast<int>(std::floor(gj)) - 1, 0, nr - 3);
            if (gj < -1e-9 || gj > nr + 1e-9) {
              rhs(row) -= prob.e2 * prob.closure(grid.omega(ti), std::exp(target_rho));
            } else {
              double t = gj - base;
              double l[4];
              l[0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
              l[1] = t * (t - 2) * (t - 3) / 2.0;
              l[2] = -t * (t - 1) * (t - 3) / 2.0;
              l[3] = t * (t - 1) * (t - 2) / 6.0;
              for (int k = 0; k < 4; ++k)
                trip.emplace_back(row, grid.index(ti, base + k), prob.e2 * l[k]);
            }
          }
        }
        continue;
      }
      // interior 5-point in (rho, omega): u_rr + u_ww = e^{2 rho} f
      Complex cw(1.0 / (dw * dw)), cr(1.0 / (dr * dr));
      trip.emplace_back(row, grid.index(i, j - 1), cr);
      trip.emplace_back(row, grid.index(i, j + 1), cr);
      trip.emplace_back(row, grid.index(i - 1, j), cw);
      trip.emplace_back(row, grid.index(i + 1, j), cw);
      trip.emplace_back(row, row, -2.0 * (cw + cr));
      rhs(row) = std::exp(2.0 * rho) * prob.f(w, r);
    }
  }
  SectorSystem sys;
  sys.grid = grid;
  sys.matrix.resize(grid.nodes(), grid.nodes());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = std::move(rhs);
  return sys;
}

struct DiscreteSolution {
  SectorGrid grid;
  std::vector<Complex> values; // node-major per grid.index
  double relative_residual = 0.0;

  Complex at(int i_omega, int j_rho) const { return values[grid.index(i_omega, j_rho)]; }

  /// Tensor field over (omega, r) with log-spaced radii, ready for the
  /// extraction routines (cubic interpolation between nodes).
  SampledField field() const {
    std::vector<double> omegas(grid.n_omega + 1), radii(grid.n_rho + 1);
    for (int i = 0; i <= grid.n_omega; ++i) omegas[i] = grid.omega(i);
    for (int j = 0; j <= grid.n_rho; ++j) radii[j] = std::exp(grid.rho(j));
    std::vector<Complex> vals(values.size());
    for (int i = 0; i <= grid.n_omega; ++i)
      for (int j = 0; j <= grid.n_rho; ++j) vals[i * (grid.n_rho + 1) + j] = at(i, j);
    return SampledField(Pole::G1, std::move(omegas), std::move(radii), std::move(vals));
  }
};

/// Direct sparse solve (deterministic).  The relative residual of the full
/// assembled system is verified below 1e-10.
inline DiscreteSolution solve(const SectorSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(sys.matrix);
  if (lu.info() != Eigen::Success)
    throw SolverError("sector solve: factorization failed (singular or near-singular system)");
  Vector x = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success) throw SolverError("sector solve: back substitution failed");
  double rhs_norm = sys.rhs.norm();
  double resid = (sys.matrix * x - sys.rhs).norm() / std::max(rhs_norm, 1e-300);
  if (!(resid < 1e-10))
    throw SolverError("sector solve: relative residual " + format_g17(resid) +
                      " exceeds 1e-10 (condition too large)");
  DiscreteSolution sol;
  sol.grid = sys.grid;
  sol.values.assign(x.data(), x.data() + x.size());
  sol.relative_residual = resid;
  return sol;
}

/// Convenience: manufactured problem from an exact field (traces and
/// closures are the exact solution, interior data its Laplacian).
inline SectorProblem manufactured_problem(const SectorGrid& grid, Complex e2, double omega2,
                                          double beta2, const FieldFn& u_exact,
                                          const FieldFn& lap_u) {
  SectorProblem prob;
  prob.e2 = e2;
  prob.omega2 = omega2;
  prob.beta2 = beta2;
  prob.f = lap_u;
  FieldFn u = u_exact;
  double b1 = grid.b1, b2 = grid.b2;
  prob.g1 = [u, b1](double r) { return u(b1, r); };
  prob.g2 = [u, b2, e2, omega2, beta2](double r) {
    return u(b2, r) + e2 * u(b2 + omega2, beta2 * r);
  };
  prob.closure = u;
  return prob;
}

struct MMSRow {
  int n = 0;               // cells per direction
  double h = 0.0;          // max spacing
  double max_error = 0.0;  // nodal max error
  double observed_order = 0.0;
  std::vector<Complex> fit_coefficients;
  Complex c1_functional{0.0};
  bool has_functional = false;
};

struct MMSStudy {
  std::vector<MMSRow> rows;
};

/// Grid-refinement study: solve the manufactured problem on each grid,
/// record max-norm errors and observed orders, then feed the finest
/// solution(s) through both extraction routes.
struct MMSExtraction {
  std::vector<PowerSolution> fit_basis; // singular block for the fit route
  int smooth_degree = 2;
  // functional route (optional)
  const AnglePencil* pencil = nullptr;
  std::vector<AdjointChain> adjoint1;
  std::vector<std::vector<Complex>> c2;
  std::vector<std::vector<PowerSolution>> u12;
  Cutoff eta1{0.25, 0.5};
};

inline MMSStudy mms_study(const SectorGrid& base_grid, Complex e2, double omega2, double beta2,
                          const FieldFn& u_exact, const FieldFn& lap_u,
                          const std::vector<int>& cell_counts, const MMSExtraction& ext) {
  MMSStudy study;
  study.rows.resize(cell_counts.size());
  // grids are independent; results land in per-index slots
  parallel_for(static_cast<int>(cell_counts.size()), [&](int idx) {
    int n = cell_counts[idx];
    SectorGrid grid = base_grid;
    grid.n_rho = n;
    grid.n_omega = n;
    SectorProblem prob = manufactured_problem(grid, e2, omega2, beta2, u_exact, lap_u);
    DiscreteSolution sol = solve(assemble(grid, prob));
    MMSRow row;
    row.n = n;
    row.h = std::max(grid.drho(), grid.domega());
    for (int i = 0; i <= grid.n_omega; ++i)
      for (int j = 0; j <= grid.n_rho; ++j) {
        double w = grid.omega(i), r = std::exp(grid.rho(j));
        row.max_error = std::max(row.max_error, std::abs(sol.at(i, j) - u_exact(w, r)));
      }
    SampledField field = sol.field();
    if (!ext.fit_basis.empty()) {
      FitResult fit = extract_fit(field, ext.fit_basis, ext.smooth_degree);
      row.fit_coefficients = fit.coefficients;
    }
    if (ext.pencil && !ext.adjoint1.empty()) {
      auto c1 = extract_c1_functional(*ext.pencil, field.fn(), ext.c2, ext.u12, ext.adjoint1,
                                      ext.eta1, QuadratureSpec{}, nullptr, field.r_min());
      row.c1_functional = c1[0][0];
      row.has_functional = true;
    }
    study.rows[idx] = std::move(row);
  });
  for (size_t i = 1; i < study.rows.size(); ++i) {
    const MMSRow& prev = study.rows[i - 1];
    MMSRow& row = study.rows[i];
    row.observed_order = std::log(prev.max_error / row.max_error) / std::log(prev.h / row.h);
  }
  return study;
}

} // namespace pencil
