#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pencil/adjoint.hpp"
#include "pencil/core.hpp"
#include "pencil/linalg.hpp"
#include "pencil/parallel.hpp"
#include "pencil/power_solution.hpp"
#include "pencil/quadrature.hpp"
#include "pencil/singular.hpp"

namespace pencil {

using FieldFn = std::function<Complex(double omega, double r)>;
using RayFn = std::function<Complex(double r)>;

struct QuadratureSpec {
  int n_omega = 128;  // angular nodes (trapezoid on the circle, Gauss on arcs)
  int n_radial = 96;  // Gauss nodes in ln r
  double r_floor = 1e-7; // inner truncation for ray integrals
};

/// Field samples near a conjugation point on a tensor grid (angles x
/// log-spaced radii), optionally carrying the exact evaluator it was sampled
/// from.  Interpolation is local cubic in (omega, ln r).
class SampledField {
public:
  SampledField(Pole pole, std::vector<double> omegas, std::vector<double> radii,
               std::vector<Complex> values, std::optional<FieldFn> exact = std::nullopt)
      : pole_(pole), omegas_(std::move(omegas)), radii_(std::move(radii)),
        values_(std::move(values)), exact_(std::move(exact)) {
    if (omegas_.size() < 16 || radii_.size() < 16)
      throw InputError("SampledField: need at least a 16 x 16 tensor grid");
    if (values_.size() != omegas_.size() * radii_.size())
      throw InputError("SampledField: sample count mismatch");
    for (size_t j = 1; j + 1 < radii_.size(); ++j) {
      double a = std::log(radii_[j] / radii_[j - 1]);
      double b = std::log(radii_[j + 1] / radii_[j]);
      if (std::abs(a - b) > 1e-8 * std::max(std::abs(a), std::abs(b)))
        throw InputError("SampledField: radii must be log-spaced");
    }
    for (const Complex& v : values_) require_finite(v, "SampledField sample");
  }

  static SampledField sample(const FieldFn& f, Pole pole, double omega_lo, double omega_hi,
                             double r_min, double r_max, int n_omega, int n_radial,
                             bool keep_exact = true) {
    std::vector<double> omegas(n_omega), radii(n_radial);
    for (int i = 0; i < n_omega; ++i)
      omegas[i] = omega_lo + (omega_hi - omega_lo) * i / (n_omega - 1);
    for (int j = 0; j < n_radial; ++j)
      radii[j] = r_min * std::pow(r_max / r_min, static_cast<double>(j) / (n_radial - 1));
    std::vector<Complex> values(n_omega * n_radial);
    for (int i = 0; i < n_omega; ++i)
      for (int j = 0; j < n_radial; ++j) values[i * n_radial + j] = f(omegas[i], radii[j]);
    return SampledField(pole, std::move(omegas), std::move(radii), std::move(values),
                        keep_exact ? std::optional<FieldFn>(f) : std::nullopt);
  }

  Pole pole() const { return pole_; }
  double r_min() const { return radii_.front(); }
  double r_max() const { return radii_.back(); }
  double omega_lo() const { return omegas_.front(); }
  double omega_hi() const { return omegas_.back(); }
  const std::vector<double>& omegas() const { return omegas_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<Complex>& values() const { return values_; }
  bool has_exact() const { return exact_.has_value(); }

  /// Exact evaluator when available, else tensor cubic interpolation.
  FieldFn fn() const {
    if (exact_) return *exact_;
    SampledField copy = *this;
    return [copy](double w, double r) { return copy.interpolate(w, r); };
  }

  Complex interpolate(double w, double r) const {
    double gx = index_coord(omegas_, w, false);
    double gy = index_coord(radii_, r, true);
    int nx = static_cast<int>(omegas_.size()), ny = static_cast<int>(radii_.size());
    int ix = std::clamp(static_cast<int>(std::floor(gx)), 1, nx - 3);
    int iy = std::clamp(static_cast<int>(std::floor(gy)), 1, ny - 3);
    double tx = gx - ix, ty = gy - iy;
    Complex rows[4];
    for (int a = -1; a <= 2; ++a) {
      Complex c[4];
      for (int b = -1; b <= 2; ++b) c[b + 1] = values_[(ix + a) * ny + (iy + b)];
      rows[a + 1] = cubic(c, ty);
    }
    return cubic(rows, tx);
  }

private:
  Pole pole_;
  std::vector<double> omegas_, radii_;
  std::vector<Complex> values_;
  std::optional<FieldFn> exact_;

  static double index_coord(const std::vector<double>& grid, double x, bool log_axis) {
    double lo = log_axis ? std::log(grid.front()) : grid.front();
    double hi = log_axis ? std::log(grid.back()) : grid.back();
    double v = log_axis ? std::log(x) : x;
    return (v - lo) / (hi - lo) * (grid.size() - 1);
  }

  static Complex cubic(const Complex c[4], double t) {
    // Catmull-Rom through the four stencil values
    return c[1] + 0.5 * t * (c[2] - c[0] +
                             t * (2.0 * c[0] - 5.0 * c[1] + 4.0 * c[2] - c[3] +
                                  t * (3.0 * (c[1] - c[2]) + c[3] - c[0])));
  }
};

namespace detail {

/// Angular quadrature nodes/weights on [lo, hi], Gauss per subsegment split
/// at the given interior angles.
struct AngularRule {
  std::vector<double> nodes, weights;
};

inline AngularRule angular_rule(double lo, double hi, const std::vector<double>& splits,
                                int n_per_segment) {
  std::vector<double> cuts{lo};
  for (double s : splits)
    if (s > lo + 1e-12 && s < hi - 1e-12) cuts.push_back(s);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  GaussLegendre gl(n_per_segment);
  AngularRule rule;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    double mid = 0.5 * (cuts[k] + cuts[k + 1]), half = 0.5 * (cuts[k + 1] - cuts[k]);
    for (int i = 0; i < n_per_segment; ++i) {
      rule.nodes.push_back(mid + half * gl.nodes[i]);
      rule.weights.push_back(half * gl.weights[i]);
    }
  }
  return rule;
}

/// Pairing of u against the cutoff commutator acting on one adjoint member:
///   <[Lap, eta] u, i v_k> = int u(w, r) K(w, r) dr dw,
/// where the radial integration by parts moved every derivative onto the
/// analytic data:
///   K = conj(i v_k) (-eta'' r - eta') - 2 eta' r conj(i d_r v_k).
inline Complex commutator_pairing(const FieldFn& u, const Cutoff& eta,
                                  const AdjointPowerSolution& v, int member, double ang_lo,
                                  double ang_hi, const std::vector<double>& ang_splits,
                                  bool periodic_chart, const QuadratureSpec& q) {
  // Gauss per segment everywhere: spectral for piecewise-analytic densities
  // and indifferent to kinks at segment ends (e.g. a circle density kinked at
  // the wrap point).
  (void)periodic_chart;
  AngularRule ang = angular_rule(ang_lo, ang_hi, ang_splits, std::max(32, q.n_omega / 2));
  GaussLegendre glr(q.n_radial);
  double t_lo = std::log(eta.r_in()), t_hi = std::log(eta.r_out());
  double tm = 0.5 * (t_lo + t_hi), th = 0.5 * (t_hi - t_lo);
  Complex acc(0.0);
  for (int i = 0; i < q.n_radial; ++i) {
    double r = std::exp(tm + th * glr.nodes[i]);
    double wr = glr.weights[i] * th * r; // dr = r dt
    double e1 = eta.dvalue(r), e2 = eta.d2value(r);
    Complex ang_sum(0.0);
    for (size_t j = 0; j < ang.nodes.size(); ++j) {
      double w = ang.nodes[j];
      Complex kern = std::conj(kI * v.eval(member, w, r)) * (-e2 * r - e1) -
                     2.0 * e1 * r * std::conj(kI * v.eval_dr(member, w, r));
      ang_sum += ang.weights[j] * u(w, r) * kern;
    }
    acc += wr * ang_sum;
  }
  return acc;
}

/// Data pairing <eta f, i v_k> with the polar measure, over the cutoff support.
inline Complex data_pairing(const FieldFn& f, const Cutoff& eta, const AdjointPowerSolution& v,
                            int member, double ang_lo, double ang_hi,
                            const std::vector<double>& ang_splits, bool periodic_chart,
                            const QuadratureSpec& q) {
  AngularRule ang = angular_rule(ang_lo, ang_hi, ang_splits, std::max(32, q.n_omega / 2));
  (void)periodic_chart;
  GaussLegendre glr(q.n_radial);
  double t_lo = std::log(q.r_floor), t_hi = std::log(eta.r_out());
  double tm = 0.5 * (t_lo + t_hi), th = 0.5 * (t_hi - t_lo);
  Complex acc(0.0);
  for (int i = 0; i < q.n_radial; ++i) {
    double r = std::exp(tm + th * glr.nodes[i]);
    double wr = glr.weights[i] * th * r * r; // dr = r dt, measure r dr
    double ev = eta.value(r);
    if (ev == 0.0) continue;
    Complex ang_sum(0.0);
    for (size_t j = 0; j < ang.nodes.size(); ++j)
      ang_sum += ang.weights[j] * f(ang.nodes[j], r) * std::conj(kI * v.eval(member, ang.nodes[j], r));
    acc += wr * ev * ang_sum;
  }
  return acc;
}

/// 1-D ray pairing int g(r) conj(i w_row(r)) dr in log coordinates.
inline Complex ray_pairing(const RayFn& g, const AdjointPowerSolution& v, int member, int row,
                           double r_lo, double r_hi, const QuadratureSpec& q) {
  GaussLegendre glr(q.n_radial);
  double t_lo = std::log(r_lo), t_hi = std::log(r_hi);
  double tm = 0.5 * (t_lo + t_hi), th = 0.5 * (t_hi - t_lo);
  Complex acc(0.0);
  for (int i = 0; i < q.n_radial; ++i) {
    double r = std::exp(tm + th * glr.nodes[i]);
    double wr = glr.weights[i] * th * r; // dr = r dt
    acc += wr * g(r) * std::conj(kI * v.weight_value(member, row, r));
  }
  return acc;
}

} // namespace detail

// --- functional extraction at the interior pole --------------------------------

/// Coefficients of the interior-point asymptotics by the adjoint pairing:
/// c2^{(k,zeta)} = <Lap(eta2 u), i v2^{(kappa-k-1,zeta)}>, evaluated through
/// the cutoff commutator (plus the data term when f = Lap u is nonzero).
/// Output is chain-major: result[zeta][k].
inline std::vector<std::vector<Complex>> extract_c2_functional(
    const FieldFn& u, const std::vector<AdjointChain>& adjoint2, const Cutoff& eta2,
    const QuadratureSpec& q = {}, const FieldFn* data_f = nullptr, double field_r_min = 0.0,
    double field_r_max = 1e300) {
  if (field_r_min > eta2.r_in() || field_r_max < eta2.r_out())
    throw ResolutionError("extract_c2_functional: field annulus does not cover the cutoff "
                          "transition");
  if (q.n_radial < 8)
    throw ResolutionError("extract_c2_functional: need at least 8 radial quadrature nodes");
  std::vector<std::vector<Complex>> out;
  for (const AdjointChain& chain : adjoint2) {
    AdjointPowerSolution v = adjoint_power(chain, 1);
    int kappa = chain.length();
    std::vector<Complex> coeffs(kappa);
    std::vector<double> splits;
    for (const auto& tr : chain.members)
      for (double b : tr.psi.interior_breakpoints()) splits.push_back(b);
    for (int k = 0; k < kappa; ++k) {
      int member = kappa - k - 1;
      Complex val = detail::commutator_pairing(u, eta2, v, member, 0.0, 2.0 * kPi, splits, true,
                                               q);
      if (data_f)
        val += detail::data_pairing(*data_f, eta2, v, member, 0.0, 2.0 * kPi, splits, true, q);
      coeffs[k] = val;
    }
    out.push_back(std::move(coeffs));
  }
  return out;
}

// --- functional extraction at the vertex ----------------------------------------

/// Coefficients of the vertex asymptotics: the sampled field is first
/// corrected by the already-extracted interior coefficients
/// (u' = u - sum c2 u12), then paired with the full adjoint triple data
/// (interior commutator plus boundary-row integrals against the weights).
/// Only trace rows (order 0) are supported, matching the adjoint module.
inline std::vector<std::vector<Complex>> extract_c1_functional(
    const AnglePencil& p, const FieldFn& u, const std::vector<std::vector<Complex>>& c2,
    const std::vector<std::vector<PowerSolution>>& u12,
    const std::vector<AdjointChain>& adjoint1, const Cutoff& eta1,
    const QuadratureSpec& q = {}, const FieldFn* data_f = nullptr, double field_r_min = 1e-7) {
  for (int row = 0; row < 2; ++row)
    if (p.rows()[row].order() != 0)
      throw CapabilityError("extract_c1_functional: only order-0 rows are supported");
  if (c2.size() != u12.size())
    throw InputError("extract_c1_functional: c2 and u12 shapes must match");

  FieldFn uprime = [u, c2, u12](double w, double r) {
    Complex val = u(w, r);
    for (size_t z = 0; z < c2.size(); ++z)
      for (size_t k = 0; k < c2[z].size(); ++k) val -= c2[z][k] * u12[z][k].eval(w, r);
    return val;
  };

  std::vector<std::vector<Complex>> out;
  for (const AdjointChain& chain : adjoint1) {
    AdjointPowerSolution v = adjoint_power(p, chain, 1);
    int kappa = chain.length();
    std::vector<Complex> coeffs(kappa);
    std::vector<double> splits;
    for (const auto& tr : chain.members)
      for (double b : tr.psi.interior_breakpoints()) splits.push_back(b);
    for (int k = 0; k < kappa; ++k) {
      int member = kappa - k - 1;
      Complex val = detail::commutator_pairing(uprime, eta1, v, member, p.b1(), p.b2(), splits,
                                               false, q);
      if (data_f)
        val += detail::data_pairing(*data_f, eta1, v, member, p.b1(), p.b2(), splits, false, q);
      // boundary rows of eta1 u' paired with the weights
      for (int row = 0; row < 2; ++row) {
        const BoundaryRow& br = p.rows()[row];
        double b = p.endpoint_angle(br.endpoint);
        RayFn rowval = [&, b](double r) {
          Complex val_row = br.alpha[0] * eta1.value(r) * uprime(b, r);
          if (br.nonlocal) {
            const NonlocalTerm& t = *br.nonlocal;
            val_row += t.e * t.tau[0] * eta1.value(t.beta * r) *
                       uprime(b + t.shift, t.beta * r);
          }
          return val_row;
        };
        double beta = br.nonlocal ? br.nonlocal->beta : 1.0;
        val += detail::ray_pairing(rowval, v, member, row, field_r_min,
                                   std::max(eta1.r_out(), eta1.r_out() / beta), q);
      }
      coeffs[k] = val;
    }
    out.push_back(std::move(coeffs));
  }
  return out;
}

// --- least-squares fit extraction (independent oracle route) --------------------

struct FitResult {
  std::vector<Complex> coefficients; // aligned with the basis argument
  double residual_norm = 0.0;
  double condition = 0.0;
};

/// Linear least squares of the samples against the singular basis plus the
/// smooth polynomial block in (r e^{i w}, r e^{-i w}) up to smooth_degree.
inline FitResult extract_fit(const SampledField& field,
                             const std::vector<PowerSolution>& basis, int smooth_degree) {
  for (const PowerSolution& b : basis) {
    double growth = -b.lambda.imag(); // |r^{i lambda}| = r^{-Im lambda}
    for (int n = 0; n <= smooth_degree; ++n)
      if (std::abs(growth - n) < 0.05)
        throw InputError("extract_fit: singular exponent too close to the smooth block");
  }
  int n_singular = static_cast<int>(basis.size());
  std::vector<std::pair<int, int>> monomials;
  for (int total = 0; total <= smooth_degree; ++total)
    for (int a = 0; a <= total; ++a) monomials.push_back({a, total - a});

  const auto& omegas = field.omegas();
  const auto& radii = field.radii();
  const auto& vals = field.values();
  int rows = static_cast<int>(vals.size());
  int cols = n_singular + static_cast<int>(monomials.size());
  Matrix A(rows, cols);
  Vector bvec(rows);
  int r_idx = 0;
  for (size_t i = 0; i < omegas.size(); ++i)
    for (size_t j = 0; j < radii.size(); ++j, ++r_idx) {
      double w = omegas[i], r = radii[j];
      for (int s = 0; s < n_singular; ++s) A(r_idx, s) = basis[s].eval(w, r);
      Complex z = r * std::exp(kI * w);
      for (size_t m = 0; m < monomials.size(); ++m)
        A(r_idx, n_singular + static_cast<int>(m)) =
            std::pow(z, monomials[m].first) * std::pow(std::conj(z), monomials[m].second);
      bvec(r_idx) = vals[r_idx];
    }

  // column scaling for conditioning
  std::vector<double> scale(cols, 1.0);
  for (int c = 0; c < cols; ++c) {
    double m = A.col(c).cwiseAbs().maxCoeff();
    scale[c] = m > 0 ? m : 1.0;
    A.col(c) /= scale[c];
  }
  double cond = cond_number(A);
  if (cond > 1e10)
    throw IllPosedFitError("extract_fit: condition number " + format_g17(cond) +
                           " (narrow the annulus or prune the basis)");
  Vector x = A.colPivHouseholderQr().solve(bvec);
  FitResult res;
  res.condition = cond;
  res.residual_norm = (A * x - bvec).norm();
  for (int s = 0; s < n_singular; ++s) res.coefficients.push_back(x(s) / scale[s]);
  return res;
}

// --- the coupling matrix trace ----------------------------------------------------

// beta of a row (1 when local)
inline double setup_beta(const BoundaryRow& br) { return br.nonlocal ? br.nonlocal->beta : 1.0; }

struct A12Setup {
  AnglePencil pencil;
  Coupling coupling;
  PowerSolution u2;            // pole G2
  PowerSolution u12;           // pole G1 (matched to u2 through the coupling)
  SpecialRHS f12;              // the trace data matching u12
  AdjointPowerSolution v1;     // normalized angle adjoint (with weights)
  AdjointPowerSolution v21;    // coupled adjoint particular density at G2
  Cutoff eta1, eta2;
};

struct A12Result {
  std::vector<double> epsilons;
  std::vector<Complex> values;
  Complex limit{0.0};
  double model_residual = 0.0;
  double loglog_slope = 0.0;
  bool diverged = false;
};

/// A12(eps) = <Lap(eta_{2,eps} u2), i v21> + <L1-rows of eta_{1,eps} u12, i {v1, w1}>,
/// evaluated per epsilon with scaled cutoffs and fitted to the model
/// alpha + sum_q beta_q eps^{i (lambda2 - lambda1)} (i ln eps)^q.
inline A12Result a12_trace(const A12Setup& setup, const std::vector<double>& epsilons,
                           const QuadratureSpec& q = {}) {
  if (epsilons.size() < 4) throw InputError("a12_trace: need at least 4 epsilons");
  for (size_t i = 1; i < epsilons.size(); ++i)
    if (!(epsilons[i] < epsilons[i - 1]))
      throw InputError("a12_trace: epsilons must decrease");

  const AnglePencil& p = setup.pencil;
  A12Result res;
  res.epsilons = epsilons;
  FieldFn u2fn = [&setup](double w, double r) { return setup.u2.eval(w, r); };
  FieldFn u12fn = [&setup](double w, double r) { return setup.u12.eval(w, r); };
  std::vector<double> splits21;
  for (const auto& pw : setup.v21.psi)
    for (double b : pw.interior_breakpoints()) splits21.push_back(b);
  std::vector<double> splits1;
  for (const auto& pw : setup.v1.psi)
    for (double b : pw.interior_breakpoints()) splits1.push_back(b);

  res.values.assign(epsilons.size(), Complex(0.0));
  parallel_for(static_cast<int>(epsilons.size()), [&](int idx) {
    double eps = epsilons[idx];
    Cutoff eta2e(setup.eta2.r_in() * eps, setup.eta2.r_out() * eps);
    Cutoff eta1e(setup.eta1.r_in() * eps, setup.eta1.r_out() * eps);
    int member21 = setup.v21.log_degree();
    Complex t_g2 = detail::commutator_pairing(u2fn, eta2e, setup.v21, member21, 0.0, 2.0 * kPi,
                                              splits21, true, q);
    int member1 = setup.v1.log_degree();
    Complex t_g1 = detail::commutator_pairing(u12fn, eta1e, setup.v1, member1, p.b1(), p.b2(),
                                              splits1, false, q);
    // boundary rows: row 0 carries eta(u12| + f12) (identically zero by the
    // defining problem), row 1 the in-angle nonlocal commutator.
    for (int row = 0; row < 2; ++row) {
      const BoundaryRow& br = p.rows()[row];
      double b = p.endpoint_angle(br.endpoint);
      RayFn rowval = [&, b, row](double r) {
        Complex v = br.alpha[0] * eta1e.value(r) * setup.u12.eval(b, r);
        if (br.nonlocal) {
          const NonlocalTerm& t = *br.nonlocal;
          v += t.e * t.tau[0] * eta1e.value(t.beta * r) * setup.u12.eval(b + t.shift, t.beta * r);
        }
        if (row == 0) {
          // + eta f12 trace data
          const auto& data = setup.f12.rows[0].coeff;
          Complex f12v(0.0);
          for (size_t qq = 0; qq < data.size(); ++qq)
            f12v += data[qq] * log_power_factor(r, static_cast<int>(qq));
          f12v *= power_ri(r, setup.f12.lambda2);
          v += eta1e.value(r) * f12v;
        }
        return v;
      };
      double beta = setup_beta(br);
      t_g1 += detail::ray_pairing(rowval, setup.v1, member1, row,
                                  std::min(eta1e.r_in(), eta1e.r_in() / beta),
                                  std::max(eta1e.r_out(), eta1e.r_out() / beta), q);
    }
    res.values[idx] = t_g2 + t_g1;
  });

  // model fit
  Complex lam1 = setup.v1.lambda0, lam2 = setup.u2.lambda;
  Complex rate = kI * (lam2 - lam1);
  bool resonant = std::abs(lam2 - lam1) < 1e-10;
  int n = static_cast<int>(epsilons.size());
  int qmax = resonant ? std::max(1, setup.u12.log_degree()) : setup.u12.log_degree();
  int cols = 1 + (resonant ? qmax : qmax + 1);
  Matrix M(n, cols);
  Vector rhs(n);
  for (int i = 0; i < n; ++i) {
    double eps = epsilons[i];
    M(i, 0) = 1.0;
    int c = 1;
    if (resonant) {
      Complex il = kI * std::log(eps);
      Complex pw = il;
      for (int qq = 1; qq <= qmax; ++qq, ++c) {
        M(i, c) = pw;
        pw *= il;
      }
    } else {
      Complex base = std::exp(rate * std::log(eps));
      Complex il(1.0);
      for (int qq = 0; qq <= qmax; ++qq, ++c) {
        M(i, c) = base * il;
        il *= kI * std::log(eps);
      }
    }
    rhs(i) = res.values[i];
  }
  Vector x = lstsq_min_norm(M, rhs);
  res.limit = x(0);
  double scale = 0.0;
  for (const Complex& v : res.values) scale = std::max(scale, std::abs(v));
  res.model_residual = (M * x - rhs).norm();
  res.diverged = res.model_residual > 1e-3 * std::max(scale, 1e-300);

  // log-log slope of |A12(eps)| (meaningful when the limit vanishes)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(res.values[i]) < 1e-300) continue;
    double lx = std::log(epsilons[i]), ly = std::log(std::abs(res.values[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m >= 2) res.loglog_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return res;
}

// --- right-hand-side route (model-angle kernel elements) ------------------------

/// Manufactured problem data on both charts.
struct ModelData {
  FieldFn f_g1;  // interior data in the vertex chart
  FieldFn f_g2;  // interior data in the far chart
  RayFn f_row1;  // full nonlocal row-1 value
  RayFn f_row2;  // row-2 value
  double support_r_min = 1e-7;
  double support_r_max = 1.0;
  std::vector<double> radial_knots; // breakpoints of piecewise-smooth data
};

struct Theorem61Result {
  std::vector<std::vector<Complex>> c2, c1; // chain-major, k-minor
  Complex a12{0.0};
};

/// Coefficients straight from the right-hand side, via the model-angle
/// kernel elements Y2 = {v2, 0} and Y1 = {v1, w1} + {v21, 0} (exact kernel
/// elements of the coupled model pair, so no cutoff enters the pairing);
/// c2-block first, then the c1-block corrected by A12 * c2.
inline Theorem61Result theorem61_model(
    const AnglePencil& p, const std::vector<AdjointChain>& adjoint1,
    const std::vector<AdjointChain>& adjoint2, const AdjointPowerSolution& v21,
    const ModelData& data, Complex a12, const QuadratureSpec& q = {}, int d = 0) {
  if (d != 0)
    throw CapabilityError("theorem61_model: only the d = 0 kernel structure is supported");
  Theorem61Result out;
  out.a12 = a12;

  // radial rule in ln r, segmented at the data knots; the low end reaches far
  // below the support so slowly decaying ray data keeps its tail
  double ray_lo = std::min(1e-10, data.support_r_min);
  std::vector<double> rcuts{ray_lo};
  if (data.support_r_min > ray_lo * (1.0 + 1e-12)) rcuts.push_back(data.support_r_min);
  for (double k : data.radial_knots)
    if (k > data.support_r_min * (1.0 + 1e-12) && k < data.support_r_max * (1.0 - 1e-12))
      rcuts.push_back(k);
  rcuts.push_back(data.support_r_max);
  std::sort(rcuts.begin(), rcuts.end());
  GaussLegendre glseg(std::max(24, q.n_radial / static_cast<int>(rcuts.size() - 1)));
  std::vector<double> rnodes, rweights;
  for (size_t sgi = 0; sgi + 1 < rcuts.size(); ++sgi) {
    double t_lo = std::log(rcuts[sgi]), t_hi = std::log(rcuts[sgi + 1]);
    double tm = 0.5 * (t_lo + t_hi), th = 0.5 * (t_hi - t_lo);
    for (size_t i = 0; i < glseg.nodes.size(); ++i) {
      double r = std::exp(tm + th * glseg.nodes[i]);
      rnodes.push_back(r);
      rweights.push_back(glseg.weights[i] * th * r); // dr = r dt
    }
  }

  auto area_pairing = [&](const FieldFn& f, const AdjointPowerSolution& v, int member,
                          double ang_lo, double ang_hi, const std::vector<double>& splits,
                          bool periodic_chart) {
    (void)periodic_chart;
    detail::AngularRule ang =
        detail::angular_rule(ang_lo, ang_hi, splits, std::max(32, q.n_omega / 2));
    Complex acc(0.0);
    for (size_t i = 0; i < rnodes.size(); ++i) {
      double r = rnodes[i];
      double wr = rweights[i] * r; // polar measure r dr
      Complex ang_sum(0.0);
      for (size_t j = 0; j < ang.nodes.size(); ++j)
        ang_sum += ang.weights[j] * f(ang.nodes[j], r) *
                   std::conj(kI * v.eval(member, ang.nodes[j], r));
      acc += wr * ang_sum;
    }
    return acc;
  };
  auto row_pairing = [&](const RayFn& g, const AdjointPowerSolution& v, int member, int row) {
    Complex acc(0.0);
    for (size_t i = 0; i < rnodes.size(); ++i)
      acc += rweights[i] * g(rnodes[i]) * std::conj(kI * v.weight_value(member, row, rnodes[i]));
    return acc;
  };

  // c2 block
  for (const AdjointChain& chain : adjoint2) {
    AdjointPowerSolution v2 = adjoint_power(chain, 1);
    int kappa = chain.length();
    std::vector<Complex> coeffs(kappa);
    for (int k = 0; k < kappa; ++k)
      coeffs[k] = area_pairing(data.f_g2, v2, kappa - k - 1, 0.0, 2.0 * kPi, {}, true);
    out.c2.push_back(std::move(coeffs));
  }

  // c1 block
  std::vector<double> splits21;
  for (const auto& pw : v21.psi)
    for (double b : pw.interior_breakpoints()) splits21.push_back(b);
  for (const AdjointChain& chain : adjoint1) {
    AdjointPowerSolution v1 = adjoint_power(p, chain, 1);
    int kappa = chain.length();
    std::vector<double> splits;
    for (const auto& tr : chain.members)
      for (double b : tr.psi.interior_breakpoints()) splits.push_back(b);
    std::vector<Complex> coeffs(kappa);
    for (int k = 0; k < kappa; ++k) {
      int member = kappa - k - 1;
      Complex val = area_pairing(data.f_g1, v1, member, p.b1(), p.b2(), splits, false);
      val += row_pairing(data.f_row1, v1, member, 0);
      val += row_pairing(data.f_row2, v1, member, 1);
      val += area_pairing(data.f_g2, v21, v21.log_degree(), 0.0, 2.0 * kPi, splits21, true);
      coeffs[k] = val;
    }
    out.c1.push_back(std::move(coeffs));
  }
  // A12 correction: c1 <- c1 - A12 * c2 (scalar blocks)
  if (!out.c1.empty() && !out.c2.empty() && a12 != Complex(0.0)) {
    for (auto& block : out.c1)
      for (size_t k = 0; k < block.size(); ++k)
        if (k < out.c2[0].size()) block[k] -= a12 * out.c2[0][k];
  }
  return out;
}

/// Problem data generated by a composite singular function: interior data are
/// the exact cutoff commutators, boundary data the composite row values.
inline ModelData data_from_composite(const CompositeSingular& comp) {
  ModelData data;
  data.support_r_max = std::max(comp.eta1.r_out(), comp.eta2.r_out());
  data.support_r_min = 0.5 * std::min(comp.eta1.r_in(), comp.eta2.r_in());
  data.radial_knots = {comp.eta1.r_in(), comp.eta1.r_out(), comp.eta2.r_in(),
                       comp.eta2.r_out()};
  CompositeSingular c = comp;
  data.f_g1 = [c](double w, double r) {
    Complex val(0.0);
    auto add = [&](const std::optional<PowerSolution>& u, Complex coeff) {
      if (!u) return;
      double e1 = c.eta1.dvalue(r), e2 = c.eta1.d2value(r);
      val += coeff * ((e2 + e1 / r) * u->eval(w, r) + 2.0 * e1 * u->eval_dr(w, r));
    };
    add(c.u1, c.c1);
    add(c.u12, c.c2);
    return val;
  };
  data.f_g2 = [c](double w, double r) {
    if (!c.u2) return Complex(0.0);
    double e1 = c.eta2.dvalue(r), e2 = c.eta2.d2value(r);
    return c.c2 * ((e2 + e1 / r) * c.u2->eval(w, r) + 2.0 * e1 * c.u2->eval_dr(w, r));
  };
  data.f_row1 = [c](double r) { return c.row_value(0, r); };
  data.f_row2 = [c](double r) { return c.row_value(1, r); };
  return data;
}

} // namespace pencil
