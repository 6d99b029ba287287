#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pencil/analytic_jet.hpp"
#include "pencil/core.hpp"
#include "pencil/exp_poly.hpp"

namespace pencil {

enum class Arm { Lower, Upper }; // omega = b1 resp. omega = b2

/// Optional nonlocal part of a boundary row: e * beta^{i*lambda - m} applied
/// to (tau0, tau1)-weighted trace data at the shifted angle endpoint + shift.
struct NonlocalTerm {
  Complex e{0.0};
  double shift = 0.0;   // angular shift omega_s (radians)
  double beta = 1.0;    // dilation coefficient, > 0
  int order = 0;        // m_row in beta^{i*lambda - m_row}, 0 or 1
  std::array<Complex, 2> tau{Complex(1.0), Complex(0.0)};
};

/// One boundary row of the angle pencil: (alpha0, alpha1) applied to
/// (phi, phi') at its arm, plus an optional nonlocal term.
struct BoundaryRow {
  Arm endpoint = Arm::Lower;
  std::array<Complex, 2> alpha{Complex(1.0), Complex(0.0)};
  std::optional<NonlocalTerm> nonlocal;

  int order() const {
    int m = (alpha[1] != Complex(0.0)) ? 1 : 0;
    if (nonlocal) m = std::max(m, nonlocal->order);
    return m;
  }
};

/// The Mellin pencil of the model nonlocal problem in a plane angle
/// b1 < omega < b2.  The interior operator is fixed to phi'' - lambda^2 phi
/// (Laplacian principal part); the two boundary rows may carry nonlocal
/// terms that evaluate strictly inside the angle.
class AnglePencil {
public:
  AnglePencil(double b1, double b2, BoundaryRow row_lower, BoundaryRow row_upper)
      : b1_(b1), b2_(b2), rows_{std::move(row_lower), std::move(row_upper)} {
    if (!(0.0 <= b1_ && b1_ < b2_ && b2_ < 2.0 * kPi))
      throw InputError("AnglePencil: need 0 <= b1 < b2 < 2*pi");
    if (rows_[0].endpoint != Arm::Lower || rows_[1].endpoint != Arm::Upper)
      throw InputError("AnglePencil: rows must be (lower arm, upper arm)");
    for (const BoundaryRow& row : rows_) {
      if (row.alpha[0] == Complex(0.0) && row.alpha[1] == Complex(0.0))
        throw InputError("AnglePencil: local row coefficients must not both vanish");
      if (row.nonlocal) {
        const NonlocalTerm& t = *row.nonlocal;
        if (!(t.beta > 0.0)) throw InputError("AnglePencil: dilation beta must be positive");
        if (t.order != 0 && t.order != 1)
          throw InputError("AnglePencil: nonlocal order must be 0 or 1");
        double target = endpoint_angle(row.endpoint) + t.shift;
        if (!(b1_ < target && target < b2_))
          throw InputError(
              "AnglePencil: nonlocal shift must map strictly into the open angle");
      }
    }
  }

  double b1() const { return b1_; }
  double b2() const { return b2_; }
  double span() const { return b2_ - b1_; }
  const std::array<BoundaryRow, 2>& rows() const { return rows_; }

  double endpoint_angle(Arm a) const { return a == Arm::Lower ? b1_ : b2_; }

private:
  double b1_, b2_;
  std::array<BoundaryRow, 2> rows_;
};

/// The periodic pencil phi'' - lambda^2 phi on the 2*pi circle (model
/// operator at an interior conjugation point).
struct PeriodicPencil {};

// --- fundamental system -----------------------------------------------------

/// sinh(z)/z with the removable singularity handled.
inline Complex sinhc(const Complex& z) {
  if (std::abs(z) < 1e-4) {
    Complex z2 = z * z;
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
  }
  return std::sinh(z) / z;
}

/// Values (s1, s1', s2, s2') of the fundamental system at angle omega:
/// s1 = cosh(lambda (w - b1)), s2 = sinh(lambda (w - b1)) / lambda, so that
/// (s1, s1')(b1) = (1, 0) and (s2, s2')(b1) = (0, 1).
struct FundamentalValues {
  Complex s1, d_s1, s2, d_s2;
};

inline FundamentalValues fundamental_values(const AnglePencil& p, const Complex& lambda,
                                            double omega) {
  double d = omega - p.b1();
  Complex z = lambda * d;
  FundamentalValues v;
  v.s1 = std::cosh(z);
  v.d_s1 = lambda * std::sinh(z);
  v.s2 = d * sinhc(z);
  v.d_s2 = std::cosh(z);
  return v;
}

/// The fundamental system as exact exponential polynomials at a fixed lambda.
/// At lambda = 0 the limit pair (1, w - b1) is returned.
inline std::pair<ExpPoly, ExpPoly> fundamental_system(const AnglePencil& p,
                                                      const Complex& lambda) {
  double lo = p.b1(), hi = p.b2();
  if (std::abs(lambda) <= 1e-12) {
    ExpPoly s1 = ExpPoly::constant(1.0, lo, hi);
    ExpPoly s2 = ExpPoly({ExpTerm{1.0, Complex(0.0), 1}, ExpTerm{-p.b1(), Complex(0.0), 0}},
                         lo, hi);
    return {s1, s2};
  }
  ExpPoly s1 = ExpPoly::cosh_profile(lambda, p.b1(), lo, hi);
  ExpPoly s2 = ExpPoly::sinh_profile(lambda, p.b1(), lo, hi) * (1.0 / lambda);
  return {s1, s2};
}

/// Exact ExpPoly form of (1/q!) * d^q/d lambda^q of the fundamental pair at
/// lambda0.  Uses d^q s1/d lambda^q = (w-b1)^q cosh/sinh(lambda (w-b1)) and
/// d^q s2/d lambda^q = int_0^{w-b1} t^q cosh/sinh(lambda t) dt.
inline std::pair<ExpPoly, ExpPoly> fundamental_jet_term(const AnglePencil& p,
                                                        const Complex& lambda0, int q) {
  double lo = p.b1(), hi = p.b2(), span = hi - lo;
  double qfact = 1.0;
  for (int j = 2; j <= q; ++j) qfact *= j;

  ExpPoly dist = ExpPoly({ExpTerm{1.0, Complex(0.0), 1}, ExpTerm{-p.b1(), Complex(0.0), 0}},
                         lo, hi); // (w - b1)
  ExpPoly dist_q = ExpPoly::constant(1.0, lo, hi);
  for (int j = 0; j < q; ++j) dist_q = dist_q * dist;

  ExpPoly ch = std::abs(lambda0) <= 1e-12 ? ExpPoly::constant(1.0, lo, hi)
                                          : ExpPoly::cosh_profile(lambda0, p.b1(), lo, hi);
  ExpPoly sh = std::abs(lambda0) <= 1e-12 ? ExpPoly::zero(lo, hi)
                                          : ExpPoly::sinh_profile(lambda0, p.b1(), lo, hi);
  ExpPoly d_s1 = dist_q * (q % 2 == 0 ? ch : sh) * (1.0 / qfact);

  // integrand in the variable t on [0, span]
  ExpPoly tq = ExpPoly::term(1.0, q, Complex(0.0), 0.0, span);
  ExpPoly osc = std::abs(lambda0) <= 1e-12
                    ? (q % 2 == 0 ? ExpPoly::constant(1.0, 0.0, span) : ExpPoly::zero(0.0, span))
                    : (q % 2 == 0 ? ExpPoly::cosh_profile(lambda0, 0.0, 0.0, span)
                                  : ExpPoly::sinh_profile(lambda0, 0.0, 0.0, span));
  ExpPoly integrand = tq * osc;
  ExpPoly F = integrand.antiderivative();
  Complex F0 = F.eval_unchecked(0.0);
  ExpPoly d_s2 = (F.shifted_argument(-p.b1(), lo, hi) - ExpPoly::constant(F0, lo, hi)) *
                 (1.0 / qfact);
  return {d_s1, d_s2};
}

// --- boundary row application -----------------------------------------------

/// (1/j!) * j-th lambda-derivative of the row functional applied to a profile.
/// For j >= 1 only the dilation factor e * beta^{i lambda - m} depends on
/// lambda, contributing (i ln beta)^j.
inline Complex row_apply_jet(const AnglePencil& p, int row_index, const Complex& lambda, int j,
                             const ExpPoly& f, const ExpPoly& fprime) {
  const BoundaryRow& row = p.rows().at(row_index);
  double b = p.endpoint_angle(row.endpoint);
  Complex value(0.0);
  if (j == 0) value += row.alpha[0] * f.eval(b) + row.alpha[1] * fprime.eval(b);
  if (row.nonlocal) {
    const NonlocalTerm& t = *row.nonlocal;
    double c = b + t.shift;
    Complex trace = t.tau[0] * f.eval(c) + t.tau[1] * fprime.eval(c);
    Complex factor = t.e * dilation_factor(t.beta, lambda, t.order);
    Complex lnb_pow(1.0);
    double jfact = 1.0;
    for (int k = 1; k <= j; ++k) {
      lnb_pow *= kI * std::log(t.beta);
      jfact *= k;
    }
    value += factor * lnb_pow / jfact * trace;
  }
  return value;
}

inline Complex row_apply(const AnglePencil& p, int row_index, const Complex& lambda,
                         const ExpPoly& f) {
  return row_apply_jet(p, row_index, lambda, 0, f, f.derivative());
}

// --- characteristic matrix / determinant ------------------------------------

/// Entry (i, j) of the 2x2 reduction of the pencil: row_i applied to s_j.
inline Complex char_entry(const AnglePencil& p, int i, int j, const Complex& lambda) {
  const BoundaryRow& row = p.rows().at(i);
  double b = p.endpoint_angle(row.endpoint);
  FundamentalValues vb = fundamental_values(p, lambda, b);
  Complex fv = (j == 0) ? vb.s1 : vb.s2;
  Complex fdv = (j == 0) ? vb.d_s1 : vb.d_s2;
  Complex value = row.alpha[0] * fv + row.alpha[1] * fdv;
  if (row.nonlocal) {
    const NonlocalTerm& t = *row.nonlocal;
    FundamentalValues vc = fundamental_values(p, lambda, b + t.shift);
    Complex gv = (j == 0) ? vc.s1 : vc.s2;
    Complex gdv = (j == 0) ? vc.d_s1 : vc.d_s2;
    value += t.e * dilation_factor(t.beta, lambda, t.order) * (t.tau[0] * gv + t.tau[1] * gdv);
  }
  return value;
}

/// Characteristic determinant: entire in lambda; its zeros in a weight strip
/// are exactly the pencil eigenvalues there.
inline Complex char_det(const AnglePencil& p, const Complex& lambda) {
  return char_entry(p, 0, 0, lambda) * char_entry(p, 1, 1, lambda) -
         char_entry(p, 0, 1, lambda) * char_entry(p, 1, 0, lambda);
}

/// 2x2 matrix of analytic jets sharing center and order.
struct CharMatrix {
  Complex center;
  int order = 0;
  std::array<AnalyticJet, 4> entries; // row-major

  const AnalyticJet& at(int i, int j) const { return entries[2 * i + j]; }
};

inline CharMatrix char_matrix(const AnglePencil& p, const Complex& lambda0, int jet_order,
                              double rho = 0.1) {
  if (jet_order < 0) throw InputError("char_matrix: jet order must be >= 0");
  CharMatrix m;
  m.center = lambda0;
  m.order = jet_order;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      m.entries[2 * i + j] = analytic_jet(
          [&p, i, j](Complex z) { return char_entry(p, i, j, z); }, lambda0, jet_order, rho);
  return m;
}

// --- periodic pencil spectrum -----------------------------------------------

/// One Jordan chain of angular profiles phi^{(0)}, ..., phi^{(kappa-1)}.
struct ProfileChain {
  std::vector<ExpPoly> profiles;
  int length() const { return static_cast<int>(profiles.size()); }
};

struct PeriodicEigenvalue {
  Complex lambda;
  std::vector<ProfileChain> chains;
};

/// Closed-form spectrum of the periodic pencil inside the open strip
/// im_lo < Im lambda < im_hi: lambda = i n (n nonzero integer) with the two
/// rotating-mode chains of length 1, and lambda = 0 with one chain of
/// length 2 (profiles 1 and 0).  Eigenvalues within 1e-9 of a strip edge are
/// a hard error: strip lines must carry no spectrum.
inline std::vector<PeriodicEigenvalue> periodic_eigendata(double im_lo, double im_hi) {
  if (!(im_lo < im_hi) || !is_finite(im_lo) || !is_finite(im_hi))
    throw InputError("periodic_eigendata: invalid strip bounds");
  constexpr double kEdgeTol = 1e-9;
  std::vector<PeriodicEigenvalue> out;
  int n_min = static_cast<int>(std::floor(im_lo)) - 1;
  int n_max = static_cast<int>(std::ceil(im_hi)) + 1;
  for (int n = n_min; n <= n_max; ++n) {
    double im = n;
    if (std::abs(im - im_lo) < kEdgeTol || std::abs(im - im_hi) < kEdgeTol)
      throw StripViolationError("periodic pencil eigenvalue lambda = " + format_g17(im) +
                                "i lies on a strip boundary line");
    if (!(im > im_lo && im < im_hi)) continue;
    PeriodicEigenvalue ev;
    ev.lambda = Complex(0.0, im);
    if (n == 0) {
      ProfileChain chain;
      chain.profiles.push_back(ExpPoly::constant(1.0, 0.0, 2.0 * kPi));
      chain.profiles.push_back(ExpPoly::zero(0.0, 2.0 * kPi));
      ev.chains.push_back(std::move(chain));
    } else {
      for (int sgn : {+1, -1}) {
        ProfileChain chain;
        chain.profiles.push_back(
            ExpPoly::term(1.0, 0, Complex(0.0, sgn * std::abs(static_cast<double>(n))), 0.0,
                          2.0 * kPi));
        ev.chains.push_back(std::move(chain));
      }
      if (n < 0) std::swap(ev.chains[0], ev.chains[1]); // leading mode matches sign of n
    }
    out.push_back(std::move(ev));
  }
  return out;
}

} // namespace pencil
