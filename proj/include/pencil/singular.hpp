#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pencil/core.hpp"
#include "pencil/exp_poly.hpp"
#include "pencil/linalg.hpp"
#include "pencil/pencil.hpp"
#include "pencil/power_solution.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

/// Coupling of the angle problem to the interior conjugation point: the trace
/// (or, for m_row = 1, the radial derivative) of the interior-point solution
/// along the image of the lower arm, scaled by e1.
struct Coupling {
  Complex e1{0.0};
  double theta_star = 0.0; // evaluation angle in the far-pole chart
  int m_row = 0;           // order of the coupling operator, 0 or 1
};

/// Special right-hand side produced by the nonlocal trace: per boundary row,
/// coefficients g_q of r^{i lambda2 - m_row} (i ln r)^q / q!.
struct SpecialRHS {
  Complex lambda2;
  struct RowData {
    int m_row = 0;
    std::vector<Complex> coeff;
  };
  std::array<RowData, 2> rows;

  int max_degree() const {
    int k = 0;
    for (const auto& row : rows) k = std::max(k, static_cast<int>(row.coeff.size()) - 1);
    return k;
  }
  bool is_zero() const {
    for (const auto& row : rows)
      for (const Complex& c : row.coeff)
        if (c != Complex(0.0)) return false;
    return true;
  }
};

/// Trace of e1 * u2 (m_row = 0), or of its radial derivative (m_row = 1),
/// along the ray omega = theta_star, attached to the given boundary row.
inline SpecialRHS build_f12(const PowerSolution& u2, const Complex& e1, double theta_star,
                            int m_row, int target_row = 0) {
  if (u2.pole != Pole::G2) throw InputError("build_f12: u2 must live at the interior pole");
  if (m_row != 0 && m_row != 1) throw InputError("build_f12: coupling order must be 0 or 1");
  if (target_row != 0 && target_row != 1) throw InputError("build_f12: bad row index");
  SpecialRHS rhs;
  rhs.lambda2 = u2.lambda;
  int k = u2.log_degree();
  auto& row = rhs.rows[target_row];
  row.m_row = m_row;
  row.coeff.assign(k + 1, Complex(0.0));
  for (int q = 0; q <= k; ++q) {
    if (m_row == 0) {
      row.coeff[q] = e1 * u2.profiles[k - q].eval(theta_star);
    } else {
      // radial derivative: (r d_r) u = i lambda u + i (log shift), then / r
      Complex v = kI * u2.lambda * u2.profiles[k - q].eval(theta_star);
      if (k - q - 1 >= 0) v += kI * u2.profiles[k - q - 1].eval(theta_star);
      row.coeff[q] = e1 * v;
    }
  }
  rhs.rows[1 - target_row].m_row = 0;
  rhs.rows[1 - target_row].coeff.clear();
  return rhs;
}

/// Result of the coupled particular solution solve.
struct U12Solution {
  PowerSolution u;
  bool resonant = false;
  int extension = 0; // extra log degree added in resonant mode
  std::string selection = "zero eigen-component (minimal norm)";
};

namespace detail {

/// Exact particular solution of phi'' - lambda^2 phi = h by variation of
/// parameters with the (s1, s2) fundamental system (Wronskian 1).
inline ExpPoly particular_interior(const AnglePencil& p, const Complex& lambda,
                                   const ExpPoly& h) {
  auto [s1, s2] = fundamental_system(p, lambda);
  ExpPoly g1 = (s1 * h).antiderivative();
  ExpPoly g2 = (s2 * h).antiderivative();
  Complex g1b = g1.eval_unchecked(p.b1());
  Complex g2b = g2.eval_unchecked(p.b1());
  double lo = p.b1(), hi = p.b2();
  ExpPoly i1 = g1 - ExpPoly::constant(g1b, lo, hi);
  ExpPoly i2 = g2 - ExpPoly::constant(g2b, lo, hi);
  return s2 * i1 - s1 * i2;
}

struct U12Pipeline {
  const AnglePencil& p;
  Complex lambda2;
  int qmax;

  /// Coefficient functions c_q for unknown vector x = (a_0, b_0, ..., a_Q, b_Q).
  std::vector<ExpPoly> coefficients(const Vector& x) const {
    auto [s1, s2] = fundamental_system(p, lambda2);
    std::vector<ExpPoly> c(qmax + 1, ExpPoly::zero(p.b1(), p.b2()));
    for (int q = qmax; q >= 0; --q) {
      ExpPoly h = ExpPoly::zero(p.b1(), p.b2());
      if (q + 1 <= qmax) h += 2.0 * lambda2 * c[q + 1];
      if (q + 2 <= qmax) h += c[q + 2];
      ExpPoly part = h.empty() ? ExpPoly::zero(p.b1(), p.b2())
                               : particular_interior(p, lambda2, h);
      c[q] = x(2 * q) * s1 + x(2 * q + 1) * s2 + part;
    }
    return c;
  }

  /// Boundary-row values per log level: row sigma, level q:
  /// sum_j (1/j!)(d^j row)(lambda2)(c_{q+j}).
  Vector row_values(const std::vector<ExpPoly>& c) const {
    Vector r(2 * (qmax + 1));
    for (int q = 0; q <= qmax; ++q)
      for (int row = 0; row < 2; ++row) {
        Complex v(0.0);
        for (int j = 0; q + j <= qmax; ++j)
          v += row_apply_jet(p, row, lambda2, j, c[q + j], c[q + j].derivative());
        r(2 * q + row) = v;
      }
    return r;
  }
};

} // namespace detail

/// Particular log-power solution of the angle problem with the special
/// right-hand side: interior equation homogeneous, boundary rows
/// (-rhs_row0, -rhs_row1-style data as provided).  In resonant mode
/// (lambda2 an eigenvalue) the log degree is extended by the greatest
/// partial multiplicity and the free eigen-component is fixed to zero.
inline U12Solution solve_u12(const AnglePencil& p, const SpecialRHS& rhs,
                             bool resonant_mode = false) {
  const Complex lambda2 = rhs.lambda2;

  // eigenvalue proximity test on the 2x2 characteristic matrix
  detail::Matrix2 M0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) M0(i, j) = char_entry(p, i, j, lambda2);
  Eigen::JacobiSVD<detail::Matrix2> svd(M0);
  bool near_eigen = svd.singularValues()(1) < 1e-8 * std::max(svd.singularValues()(0), 1e-300);
  if (near_eigen && !resonant_mode)
    throw ResonanceError(
        "solve_u12: lambda2 is (numerically) an eigenvalue; request resonant mode");

  int extension = 0;
  if (resonant_mode && near_eigen) {
    SmithData smith = local_smith(p, lambda2);
    extension = smith.partial.empty() ? 0 : smith.partial.front();
  }

  if (rhs.is_zero()) {
    U12Solution out;
    out.u = PowerSolution{lambda2, {ExpPoly::zero(p.b1(), p.b2())}, Pole::G1};
    out.resonant = resonant_mode && near_eigen;
    out.extension = extension;
    return out;
  }

  detail::U12Pipeline pipe{p, lambda2, rhs.max_degree() + extension};
  const int nunk = 2 * (pipe.qmax + 1);

  // defining problem: interior homogeneous, rows(u12) = -rhs
  Vector target = Vector::Zero(nunk);
  for (int q = 0; q <= pipe.qmax; ++q)
    for (int row = 0; row < 2; ++row) {
      const auto& data = rhs.rows[row].coeff;
      target(2 * q + row) = (q < static_cast<int>(data.size())) ? -data[q] : Complex(0.0);
    }

  Vector r0 = pipe.row_values(pipe.coefficients(Vector::Zero(nunk)));
  Matrix A(nunk, nunk);
  for (int i = 0; i < nunk; ++i) {
    Vector e = Vector::Zero(nunk);
    e(i) = 1.0;
    A.col(i) = pipe.row_values(pipe.coefficients(e)) - r0;
  }
  Vector b = target - r0;

  Eigen::JacobiSVD<Matrix> asvd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  asvd.setThreshold(1e-10);
  Vector x = asvd.solve(b);
  if ((A * x - b).norm() > 1e-8 * std::max(1.0, b.norm()))
    throw NumericalError("solve_u12: triangular boundary system inconsistent");
  if (!near_eigen) {
    const auto& s = asvd.singularValues();
    if (s(s.size() - 1) < 1e-8 * s(0))
      throw ResonanceError("solve_u12: system near-singular; lambda2 close to an eigenvalue");
  }

  std::vector<ExpPoly> c = pipe.coefficients(x);
  U12Solution out;
  out.resonant = resonant_mode && near_eigen;
  out.extension = extension;
  out.u.lambda = lambda2;
  out.u.pole = Pole::G1;
  out.u.profiles.resize(pipe.qmax + 1, ExpPoly::zero(p.b1(), p.b2()));
  for (int q = 0; q <= pipe.qmax; ++q) out.u.profiles[pipe.qmax - q] = c[q];
  return out;
}

/// Residual of (pencil, u12) with the special right-hand side subtracted.
inline double u12_residual(const AnglePencil& p, const PowerSolution& u, const SpecialRHS& rhs,
                           const std::vector<double>& radii) {
  int k = u.log_degree();
  std::vector<ExpPoly> cq;
  for (int q = 0; q <= k; ++q) cq.push_back(u.profiles[k - q]);
  std::vector<ExpPoly> interior = detail::interior_residual_profiles(u.lambda, cq);

  double scale = 0.0, worst = 0.0;
  const int n_omega = 40;
  for (double r : radii)
    for (int i = 0; i <= n_omega; ++i) {
      double w = p.b1() + (p.b2() - p.b1()) * i / n_omega;
      scale = std::max(scale, std::abs(u.eval(w, r)));
    }
  scale = std::max(scale, 1e-300);
  for (double r : radii) {
    for (int i = 0; i <= n_omega; ++i) {
      double w = p.b1() + (p.b2() - p.b1()) * i / n_omega;
      Complex v(0.0);
      for (int q = 0; q <= k; ++q) v += log_power_factor(r, q) * interior[q].eval(w);
      worst = std::max(worst, std::abs(v));
    }
    for (int row = 0; row < 2; ++row) {
      Complex v(0.0);
      for (int q = 0; q <= k; ++q) {
        Complex coeff(0.0);
        for (int j = 0; q + j <= k; ++j)
          coeff += row_apply_jet(p, row, u.lambda, j, cq[q + j], cq[q + j].derivative());
        const auto& data = rhs.rows[row].coeff;
        if (q < static_cast<int>(data.size())) coeff += data[q];
        v += log_power_factor(r, q) * coeff;
      }
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst / scale;
}

// --- cutoffs and composite singular functions ---------------------------------

/// Radial cutoff: identically 1 for r <= r_in, identically 0 for r >= r_out,
/// quintic smoothstep in ln r in between (C^2 at both ends, exact derivatives).
class Cutoff {
public:
  Cutoff(double r_in, double r_out) : r_in_(r_in), r_out_(r_out) {
    if (!(0.0 < r_in && r_in < r_out)) throw InputError("Cutoff: need 0 < r_in < r_out");
    log_span_ = std::log(r_out_ / r_in_);
  }

  double r_in() const { return r_in_; }
  double r_out() const { return r_out_; }

  double value(double r) const {
    if (r <= r_in_) return 1.0;
    if (r >= r_out_) return 0.0;
    double t = std::log(r / r_in_) / log_span_;
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  }

  double dvalue(double r) const {
    if (r <= r_in_ || r >= r_out_) return 0.0;
    double t = std::log(r / r_in_) / log_span_;
    double ds = -30.0 * t * t * (1.0 - t) * (1.0 - t);
    return ds / (log_span_ * r);
  }

  double d2value(double r) const {
    if (r <= r_in_ || r >= r_out_) return 0.0;
    double t = std::log(r / r_in_) / log_span_;
    double ds = -30.0 * t * t * (1.0 - t) * (1.0 - t);
    double dss = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    return (dss / log_span_ - ds) / (log_span_ * r * r);
  }

private:
  double r_in_, r_out_, log_span_;
};

/// Composite singular function: U1 = eta1 u1 near the vertex, and
/// U2 = eta2 u2 + eta1 u12 combining the interior-point power solution
/// with its coupled particular solution at the vertex.
struct CompositeSingular {
  AnglePencil pencil;
  Coupling coupling;
  Complex c1{0.0}, c2{0.0};
  std::optional<PowerSolution> u1;  // pole G1
  std::optional<PowerSolution> u2;  // pole G2
  std::optional<PowerSolution> u12; // pole G1
  Cutoff eta1, eta2;

  /// Value in the vertex chart.
  Complex eval_vertex(double omega, double r) const {
    Complex v(0.0);
    if (u1) v += c1 * eta1.value(r) * u1->eval(omega, r);
    if (u12) v += c2 * eta1.value(r) * u12->eval(omega, r);
    return v;
  }

  /// Value in the interior-point chart.
  Complex eval_far(double omega, double r) const {
    Complex v(0.0);
    if (u2) v += c2 * eta2.value(r) * u2->eval(omega, r);
    return v;
  }

  /// Boundary row values of the full (unfrozen) problem applied to the
  /// composite, at radius r.  Row 0 includes the nonlocal trace from the
  /// interior-point chart; row 1 the in-angle nonlocal term.
  Complex row_value(int row, double r) const {
    const BoundaryRow& br = pencil.rows().at(row);
    double b = pencil.endpoint_angle(br.endpoint);
    auto vertex_part = [&](double w, double rr) { return eval_vertex(w, rr); };
    auto vertex_domega = [&](double w, double rr) {
      Complex v(0.0);
      if (u1) v += c1 * eta1.value(rr) * u1->eval_domega(w, rr);
      if (u12) v += c2 * eta1.value(rr) * u12->eval_domega(w, rr);
      return v;
    };
    Complex value = br.alpha[0] * vertex_part(b, r);
    if (br.alpha[1] != Complex(0.0)) value += br.alpha[1] * vertex_domega(b, r) / r;
    if (br.nonlocal) {
      const NonlocalTerm& t = *br.nonlocal;
      double c = b + t.shift;
      Complex trace = t.tau[0] * vertex_part(c, t.beta * r);
      if (t.tau[1] != Complex(0.0)) trace += t.tau[1] * vertex_domega(c, t.beta * r) / (t.beta * r);
      value += t.e * trace;
    }
    if (row == 0 && coupling.e1 != Complex(0.0)) {
      if (coupling.m_row == 0) {
        value += coupling.e1 * eval_far(coupling.theta_star, r);
      } else {
        Complex v(0.0);
        if (u2) v += c2 * (eta2.value(r) * u2->eval_dr(coupling.theta_star, r) +
                           eta2.dvalue(r) * u2->eval(coupling.theta_star, r));
        value += coupling.e1 * v;
      }
    }
    return value;
  }
};

/// Assemble a composite; supports of the two cutoffs must not reach the other
/// pole (separation = distance between the poles).
inline CompositeSingular composite(const AnglePencil& p, const Coupling& coupling, Complex c1,
                                   Complex c2, std::optional<PowerSolution> u1,
                                   std::optional<PowerSolution> u2,
                                   std::optional<PowerSolution> u12, const Cutoff& eta1,
                                   const Cutoff& eta2, double separation = 1e6) {
  if (eta1.r_out() + eta2.r_out() > separation)
    throw GeometryError("composite: cutoff supports overlap the other pole");
  if (u1 && u1->pole != Pole::G1) throw InputError("composite: u1 must live at the vertex");
  if (u12 && u12->pole != Pole::G1) throw InputError("composite: u12 must live at the vertex");
  if (u2 && u2->pole != Pole::G2)
    throw InputError("composite: u2 must live at the interior pole");
  return CompositeSingular{p, coupling, c1, c2, std::move(u1), std::move(u2), std::move(u12),
                           eta1, eta2};
}

/// Sampled smooth-remainder check: max boundary-row magnitude in the region
/// where both cutoffs are identically 1 (exact cancellation expected for
/// matched composites), plus a decay exponent fitted over the sampled radii.
struct SmoothRemainderCheck {
  double max_inner_row = 0.0;
  double fitted_exponent = 0.0; // slope of log|row| vs log r, 0 if rows vanish
};

inline SmoothRemainderCheck check_smooth_remainder(const CompositeSingular& comp,
                                                   int n_radii = 24) {
  double r_hi = 0.9 * std::min(comp.eta1.r_in(), comp.eta2.r_in());
  double r_lo = 1e-3 * r_hi;
  SmoothRemainderCheck out;
  std::vector<double> lr, lv;
  for (int i = 0; i < n_radii; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (n_radii - 1));
    double v = std::max(std::abs(comp.row_value(0, r)), std::abs(comp.row_value(1, r)));
    out.max_inner_row = std::max(out.max_inner_row, v);
    if (v > 1e-300) {
      lr.push_back(std::log(r));
      lv.push_back(std::log(v));
    }
  }
  if (lr.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lr.size(); ++i) {
      mx += lr[i];
      my += lv[i];
    }
    mx /= lr.size();
    my /= lv.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < lr.size(); ++i) {
      num += (lr[i] - mx) * (lv[i] - my);
      den += (lr[i] - mx) * (lr[i] - mx);
    }
    out.fitted_exponent = den > 0 ? num / den : 0.0;
  }
  return out;
}

} // namespace pencil
