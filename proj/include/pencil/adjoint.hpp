#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pencil/core.hpp"
#include "pencil/linalg.hpp"
#include "pencil/pencil.hpp"
#include "pencil/piecewise.hpp"
#include "pencil/singular.hpp"
#include "pencil/power_solution.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

/// Eigen-data of the adjoint pencil at the conjugate of a primal eigenvalue:
/// a piecewise angular density psi (kinked at the nonlocal evaluation
/// angles) plus one boundary weight per row.
struct AdjointTriple {
  Complex lambda0; // primal eigenvalue; the density solves psi'' = conj(lambda0)^2 psi
  PiecewiseExpPoly psi;
  std::array<Complex, 2> chi{Complex(0.0), Complex(0.0)};
};

/// Jordan chain of adjoint triples (members psi^{(0)}, psi^{(1)}, ...).
struct AdjointChain {
  Complex lambda0;
  std::vector<AdjointTriple> members;
  int length() const { return static_cast<int>(members.size()); }
};

namespace detail {

struct TransmissionLayout {
  std::vector<double> cuts;                 // b1, kinks..., b2
  std::vector<int> kink_row;                // row index owning each interior cut
  int pieces() const { return static_cast<int>(cuts.size()) - 1; }
};

inline TransmissionLayout transmission_layout(const AnglePencil& p) {
  TransmissionLayout lay;
  std::vector<std::pair<double, int>> kinks;
  for (int row = 0; row < 2; ++row) {
    const BoundaryRow& br = p.rows()[row];
    if (!br.nonlocal) continue;
    if (br.nonlocal->tau[1] != Complex(0.0))
      throw CapabilityError("adjoint: only order-0 nonlocal traces (tau1 = 0) are supported");
    kinks.push_back({p.endpoint_angle(br.endpoint) + br.nonlocal->shift, row});
  }
  std::sort(kinks.begin(), kinks.end());
  for (size_t i = 1; i < kinks.size(); ++i)
    if (std::abs(kinks[i].first - kinks[i - 1].first) < 1e-10)
      throw CapabilityError("adjoint: coincident nonlocal evaluation angles unsupported");
  lay.cuts.push_back(p.b1());
  for (const auto& [c, row] : kinks) {
    lay.cuts.push_back(c);
    lay.kink_row.push_back(row);
  }
  lay.cuts.push_back(p.b2());
  return lay;
}

/// Basis pair on a piece, normalized at the piece's left end.
inline std::pair<ExpPoly, ExpPoly> piece_basis(const Complex& mu, double lo, double hi) {
  if (std::abs(mu) <= 1e-12) {
    ExpPoly one = ExpPoly::constant(1.0, lo, hi);
    ExpPoly lin = ExpPoly({ExpTerm{1.0, Complex(0.0), 1}, ExpTerm{-lo, Complex(0.0), 0}}, lo, hi);
    return {one, lin};
  }
  return {ExpPoly::cosh_profile(mu, lo, lo, hi),
          ExpPoly::sinh_profile(mu, lo, lo, hi) * (1.0 / mu)};
}

/// chi of a row expressed through the endpoint values (psi(b), psi'(b)) via
/// the integration-by-parts ledger:
///   lower arm:  psi'(b1) = -conj(a0) chi,  psi(b1) =  conj(a1) chi
///   upper arm:  psi'(b2) =  conj(a0) chi,  psi(b2) = -conj(a1) chi
struct ChiLedger {
  // chi = c_v * psi(b) + c_d * psi'(b)
  Complex c_v{0.0}, c_d{0.0};
};

inline ChiLedger chi_ledger(const BoundaryRow& row) {
  Complex a0 = std::conj(row.alpha[0]), a1 = std::conj(row.alpha[1]);
  ChiLedger led;
  if (row.endpoint == Arm::Lower) {
    if (std::abs(a1) >= std::abs(a0))
      led.c_v = 1.0 / a1;
    else
      led.c_d = -1.0 / a0;
  } else {
    if (std::abs(a0) >= std::abs(a1))
      led.c_d = 1.0 / a0;
    else
      led.c_v = -1.0 / a1;
  }
  return led;
}

} // namespace detail

/// The homogeneous transmission system whose kernel carries the adjoint
/// eigen-triple at conj(lambda0); its determinant vanishes exactly where the
/// characteristic determinant does.
inline Matrix transmission_matrix(const AnglePencil& p, const Complex& lambda0) {
  detail::TransmissionLayout lay = detail::transmission_layout(p);
  Complex mu = std::conj(lambda0);
  int P = lay.pieces();
  int N = 2 * P;
  Matrix A = Matrix::Zero(N, N);

  std::vector<std::pair<ExpPoly, ExpPoly>> basis;
  for (int i = 0; i < P; ++i)
    basis.push_back(detail::piece_basis(mu, lay.cuts[i], lay.cuts[i + 1]));

  auto val = [&](int piece, int which, double w) {
    const ExpPoly& f = which == 0 ? basis[piece].first : basis[piece].second;
    return f.eval_unchecked(w);
  };
  auto der = [&](int piece, int which, double w) {
    const ExpPoly& f = which == 0 ? basis[piece].first : basis[piece].second;
    return f.derivative().eval_unchecked(w);
  };

  // endpoint conditions conj(a0) psi + conj(a1) psi' = 0 at both arms
  int eq = 0;
  {
    const BoundaryRow& row = p.rows()[0];
    A(eq, 0) = std::conj(row.alpha[0]) * val(0, 0, p.b1()) +
               std::conj(row.alpha[1]) * der(0, 0, p.b1());
    A(eq, 1) = std::conj(row.alpha[0]) * val(0, 1, p.b1()) +
               std::conj(row.alpha[1]) * der(0, 1, p.b1());
    ++eq;
  }
  {
    const BoundaryRow& row = p.rows()[1];
    int last = P - 1;
    A(eq, 2 * last) = std::conj(row.alpha[0]) * val(last, 0, p.b2()) +
                      std::conj(row.alpha[1]) * der(last, 0, p.b2());
    A(eq, 2 * last + 1) = std::conj(row.alpha[0]) * val(last, 1, p.b2()) +
                          std::conj(row.alpha[1]) * der(last, 1, p.b2());
    ++eq;
  }

  // chi of each arm as a linear functional of the unknowns
  auto chi_column = [&](int row_index) {
    Vector c = Vector::Zero(N);
    const BoundaryRow& row = p.rows()[row_index];
    detail::ChiLedger led = detail::chi_ledger(row);
    if (row.endpoint == Arm::Lower) {
      c(0) += led.c_v * val(0, 0, p.b1()) + led.c_d * der(0, 0, p.b1());
      c(1) += led.c_v * val(0, 1, p.b1()) + led.c_d * der(0, 1, p.b1());
    } else {
      int last = P - 1;
      c(2 * last) += led.c_v * val(last, 0, p.b2()) + led.c_d * der(last, 0, p.b2());
      c(2 * last + 1) += led.c_v * val(last, 1, p.b2()) + led.c_d * der(last, 1, p.b2());
    }
    return c;
  };

  for (int k = 0; k < static_cast<int>(lay.kink_row.size()); ++k) {
    double c = lay.cuts[k + 1];
    int left = k, right = k + 1;
    // continuity
    A(eq, 2 * left) += val(left, 0, c);
    A(eq, 2 * left + 1) += val(left, 1, c);
    A(eq, 2 * right) -= val(right, 0, c);
    A(eq, 2 * right + 1) -= val(right, 1, c);
    ++eq;
    // derivative jump tied to the owning row's weight:
    // psi'(c+) - psi'(c-) + conj(e beta^{i l0 - m}) chi_row = 0
    int row_index = lay.kink_row[k];
    const NonlocalTerm& t = *p.rows()[row_index].nonlocal;
    Complex factor = std::conj(t.e * dilation_factor(t.beta, lambda0, t.order) * t.tau[0]);
    Vector chi_c = chi_column(row_index);
    for (int j = 0; j < N; ++j) A(eq, j) += factor * chi_c(j);
    A(eq, 2 * right) += der(right, 0, c);
    A(eq, 2 * right + 1) += der(right, 1, c);
    A(eq, 2 * left) -= der(left, 0, c);
    A(eq, 2 * left + 1) -= der(left, 1, c);
    ++eq;
  }
  return A;
}

inline double transmission_smin(const AnglePencil& p, const Complex& lambda0) {
  Matrix A = transmission_matrix(p, lambda0);
  return smallest_singular_value(A) / std::max(largest_singular_value(A), 1e-300);
}

namespace detail {

inline AdjointTriple assemble_triple(const AnglePencil& p, const Complex& lambda0,
                                     const Vector& x,
                                     const std::vector<ExpPoly>* particular = nullptr) {
  TransmissionLayout lay = transmission_layout(p);
  Complex mu = std::conj(lambda0);
  int P = lay.pieces();
  std::vector<PiecewiseExpPoly::Piece> pieces;
  for (int i = 0; i < P; ++i) {
    auto [p1, p2] = piece_basis(mu, lay.cuts[i], lay.cuts[i + 1]);
    ExpPoly f = x(2 * i) * p1 + x(2 * i + 1) * p2;
    if (particular) f += (*particular)[i];
    pieces.push_back({lay.cuts[i], lay.cuts[i + 1], f});
  }
  AdjointTriple tr;
  tr.lambda0 = lambda0;
  tr.psi = PiecewiseExpPoly(std::move(pieces));
  PiecewiseExpPoly dpsi = tr.psi.derivative();
  for (int row = 0; row < 2; ++row) {
    const BoundaryRow& br = p.rows()[row];
    ChiLedger led = chi_ledger(br);
    double b = p.endpoint_angle(br.endpoint);
    Complex v = br.endpoint == Arm::Lower ? tr.psi.eval_right(b) : tr.psi.eval_left(b);
    Complex d = br.endpoint == Arm::Lower ? dpsi.eval_right(b) : dpsi.eval_left(b);
    tr.chi[row] = led.c_v * v + led.c_d * d;
  }
  return tr;
}

} // namespace detail

/// Adjoint eigen-triple at a simple eigenvalue, from the transmission
/// formulation.  The kernel must be 1-dimensional.
inline AdjointTriple adjoint_eigenvector(const AnglePencil& p, const Complex& lambda0) {
  Matrix A = transmission_matrix(p, lambda0);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int N = static_cast<int>(A.rows());
  double smax = std::max(s(0), 1e-300);
  if (!(s(N - 1) < 1e-6 * smax))
    throw MultiplicityError("adjoint_eigenvector: transmission kernel is trivial here");
  if (N >= 2 && s(N - 2) < 1e-6 * smax)
    throw MultiplicityError("adjoint_eigenvector: transmission kernel dimension exceeds 1");
  Vector x = svd.matrixV().col(N - 1);
  // deterministic scaling: largest entry real positive
  int arg = 0;
  for (int i = 1; i < N; ++i)
    if (std::abs(x(i)) > std::abs(x(arg))) arg = i;
  x /= x(arg);
  return detail::assemble_triple(p, lambda0, x);
}

/// Associated adjoint member for a length-2 chain: interior equation
/// psi1'' - mu^2 psi1 = 2 mu psi0, jump conditions picking up the derivative
/// of the dilation factor against chi0.
inline AdjointChain adjoint_chain2(const AnglePencil& p, const Complex& lambda0,
                                   const AdjointTriple& eigen) {
  detail::TransmissionLayout lay = detail::transmission_layout(p);
  Complex mu = std::conj(lambda0);
  int P = lay.pieces();
  int N = 2 * P;

  // piecewise particular solutions for the rhs 2 mu psi0
  std::vector<ExpPoly> particular;
  for (int i = 0; i < P; ++i) {
    double lo = lay.cuts[i], hi = lay.cuts[i + 1];
    auto [p1, p2] = detail::piece_basis(mu, lo, hi);
    ExpPoly h = eigen.psi.pieces()[i].f.with_domain(lo, hi) * (2.0 * mu);
    ExpPoly g1 = (p1 * h).antiderivative();
    ExpPoly g2 = (p2 * h).antiderivative();
    ExpPoly i1 = g1 - ExpPoly::constant(g1.eval_unchecked(lo), lo, hi);
    ExpPoly i2 = g2 - ExpPoly::constant(g2.eval_unchecked(lo), lo, hi);
    particular.push_back(p2 * i1 - p1 * i2);
  }

  Matrix A = transmission_matrix(p, lambda0);
  // affine part: conditions applied to the particular solution, plus the
  // chi0 term from the lambda-derivative of the dilation factor
  Vector x0 = Vector::Zero(N);
  AdjointTriple part = detail::assemble_triple(p, lambda0, x0, &particular);
  Vector rhs = Vector::Zero(N);
  int eq = 0;
  {
    const BoundaryRow& row = p.rows()[0];
    PiecewiseExpPoly d = part.psi.derivative();
    rhs(eq) = -(std::conj(row.alpha[0]) * part.psi.eval_right(p.b1()) +
                std::conj(row.alpha[1]) * d.eval_right(p.b1()));
    ++eq;
  }
  {
    const BoundaryRow& row = p.rows()[1];
    PiecewiseExpPoly d = part.psi.derivative();
    rhs(eq) = -(std::conj(row.alpha[0]) * part.psi.eval_left(p.b2()) +
                std::conj(row.alpha[1]) * d.eval_left(p.b2()));
    ++eq;
  }
  for (int k = 0; k < static_cast<int>(lay.kink_row.size()); ++k) {
    double c = lay.cuts[k + 1];
    PiecewiseExpPoly d = part.psi.derivative();
    rhs(eq) = -(part.psi.eval_left(c) - part.psi.eval_right(c));
    ++eq;
    int row_index = lay.kink_row[k];
    const NonlocalTerm& t = *p.rows()[row_index].nonlocal;
    Complex factor = std::conj(t.e * dilation_factor(t.beta, lambda0, t.order) * t.tau[0]);
    Complex dfactor = std::conj(t.e * (kI * std::log(t.beta)) *
                                dilation_factor(t.beta, lambda0, t.order) * t.tau[0]);
    Complex jump_part = d.eval_right(c) - d.eval_left(c) + factor * part.chi[row_index] +
                        dfactor * eigen.chi[row_index];
    rhs(eq) = -jump_part;
    ++eq;
  }

  Vector x = lstsq_min_norm(A, rhs, 1e-10);
  if ((A * x - rhs).norm() > 1e-7 * std::max(1.0, rhs.norm()))
    throw NumericalError("adjoint_chain2: associated transmission system inconsistent");
  AdjointTriple assoc = detail::assemble_triple(p, lambda0, x, &particular);

  AdjointChain chain;
  chain.lambda0 = lambda0;
  chain.members = {eigen, assoc};
  return chain;
}

/// Closed-form adjoint chains of the periodic pencil at lambda = i n
/// (rotating modes) or lambda = 0 (constant plus a zero associate).
inline std::vector<AdjointChain> periodic_adjoint_chains(const Complex& lambda) {
  int n = static_cast<int>(std::lround(lambda.imag()));
  if (std::abs(lambda - Complex(0.0, static_cast<double>(n))) > 1e-12)
    throw InputError("periodic_adjoint_chains: lambda must be in the periodic spectrum");
  std::vector<AdjointChain> out;
  auto make = [&](const ExpPoly& f) {
    AdjointTriple t;
    t.lambda0 = lambda;
    t.psi = PiecewiseExpPoly::single(f);
    return t;
  };
  if (n == 0) {
    AdjointChain c;
    c.lambda0 = lambda;
    c.members = {make(ExpPoly::constant(1.0, 0.0, 2.0 * kPi)),
                 make(ExpPoly::zero(0.0, 2.0 * kPi))};
    out.push_back(std::move(c));
  } else {
    // density solves psi'' = conj(lambda)^2 psi = -n^2 psi
    for (int sgn : {+1, -1}) {
      AdjointChain c;
      c.lambda0 = lambda;
      c.members = {make(ExpPoly::term(1.0, 0, Complex(0.0, sgn * std::abs(n)), 0.0, 2.0 * kPi))};
      out.push_back(std::move(c));
    }
    if (n < 0) std::swap(out[0], out[1]);
  }
  return out;
}

// --- biorthogonal normalization -------------------------------------------------

/// (1/j!) <d_lambda^j L(lambda0) phi, {psi, chi}> building block of the
/// normalization pairing.  Interior derivatives: j=0: phi'' - l0^2 phi,
/// j=1: -2 l0 phi, j=2 (with the 1/2!): -phi.
class PairingProvider {
public:
  PairingProvider(const AnglePencil& p, Complex lambda0)
      : pencil_(&p), lambda0_(lambda0), periodic_(false) {}
  explicit PairingProvider(Complex lambda0) : pencil_(nullptr), lambda0_(lambda0),
                                              periodic_(true) {}

  Complex d_pairing(int j, const ExpPoly& phi, const AdjointTriple& tr) const {
    Complex s(0.0);
    if (j == 0) {
      ExpPoly interior = phi.derivative().derivative() - (lambda0_ * lambda0_) * phi;
      s += tr.psi.inner_against(interior);
    } else if (j == 1) {
      s += tr.psi.inner_against(phi * (-2.0 * lambda0_));
    } else if (j == 2) {
      s += tr.psi.inner_against(phi * Complex(-1.0));
    }
    if (!periodic_) {
      for (int row = 0; row < 2; ++row)
        s += row_apply_jet(*pencil_, row, lambda0_, j, phi, phi.derivative()) *
             std::conj(tr.chi[row]);
    }
    return s;
  }

  /// Full normalization pairing N(k, nu) between a primal chain and an
  /// adjoint chain: sum_{p<=nu} sum_{q<=k} D_{nu+k+1-p-q}(phi^{(q)}, Psi^{(p)}).
  Complex pattern(const ProfileChain& primal, int k, const AdjointChain& adj, int nu) const {
    Complex s(0.0);
    for (int pp = 0; pp <= nu; ++pp)
      for (int q = 0; q <= k; ++q)
        s += d_pairing(nu + k + 1 - pp - q, primal.profiles[q], adj.members[pp]);
    return s;
  }

  Complex lambda0() const { return lambda0_; }

private:
  const AnglePencil* pencil_;
  Complex lambda0_;
  bool periodic_;
};

/// Deviation of the full biorthogonality/normalization pattern from the
/// Kronecker target delta_{xi,zeta} delta_{kappa_xi-k-1, nu}.
inline double norm_pattern_residual(const std::vector<ProfileChain>& primal,
                                    const std::vector<AdjointChain>& adjoint,
                                    const PairingProvider& pairing) {
  double worst = 0.0;
  for (size_t zeta = 0; zeta < adjoint.size(); ++zeta)
    for (size_t xi = 0; xi < primal.size(); ++xi)
      for (int nu = 0; nu < adjoint[zeta].length(); ++nu)
        for (int k = 0; k < primal[xi].length(); ++k) {
          Complex val = pairing.pattern(primal[xi], k, adjoint[zeta], nu);
          double target =
              (xi == zeta && nu == primal[xi].length() - k - 1) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(val - Complex(target)));
        }
  return worst;
}

/// Reduced pairing <-2 lambda0 phi, psi> (the beta = 1 shortcut); reported
/// alongside the full pairing, which is the authoritative one.
inline Complex reduced_pairing(const Complex& lambda0, const ExpPoly& phi,
                               const AdjointTriple& tr) {
  return tr.psi.inner_against(phi * (-2.0 * lambda0));
}

/// Scale/mix raw adjoint chains so the full biorthogonality and
/// normalization pattern holds against the given primal canonical system.
/// Supports the shapes needed here: all chains length 1, or a single chain
/// of length 2.
inline std::vector<AdjointChain> normalize_against(const std::vector<ProfileChain>& primal,
                                                   std::vector<AdjointChain> adjoint,
                                                   const PairingProvider& pairing) {
  if (primal.size() != adjoint.size())
    throw NormalizationError("normalize_against: chain count mismatch");
  bool all_len1 = true;
  for (const auto& c : primal) all_len1 = all_len1 && c.length() == 1;
  for (const auto& c : adjoint) all_len1 = all_len1 && c.length() == 1;

  auto combine = [](const AdjointTriple& a, Complex ca, const AdjointTriple& b, Complex cb) {
    AdjointTriple out;
    out.lambda0 = a.lambda0;
    out.psi = a.psi * ca + b.psi * cb;
    for (int i = 0; i < 2; ++i) out.chi[i] = ca * a.chi[i] + cb * b.chi[i];
    return out;
  };

  if (all_len1) {
    int J = static_cast<int>(primal.size());
    Matrix P(J, J);
    for (int zeta = 0; zeta < J; ++zeta)
      for (int xi = 0; xi < J; ++xi)
        P(zeta, xi) = pairing.d_pairing(1, primal[xi].profiles[0], adjoint[zeta].members[0]);
    if (cond_number(P) > 1e8)
      throw NormalizationError("normalize_against: singular biorthogonality Gram matrix");
    Matrix M = P.inverse().conjugate();
    std::vector<AdjointChain> out(J);
    for (int zeta = 0; zeta < J; ++zeta) {
      AdjointTriple acc = combine(adjoint[0].members[0], M(zeta, 0), adjoint[0].members[0],
                                  Complex(0.0));
      for (int eta = 1; eta < J; ++eta)
        acc = combine(acc, Complex(1.0), adjoint[eta].members[0], M(zeta, eta));
      out[zeta].lambda0 = adjoint[zeta].lambda0;
      out[zeta].members = {acc};
    }
    double resid = norm_pattern_residual(primal, out, pairing);
    if (resid > 1e-8)
      throw NormalizationError("normalize_against: pattern residual " + format_g17(resid));
    return out;
  }

  if (primal.size() == 1 && primal[0].length() == 2 && adjoint[0].length() == 2) {
    const ProfileChain& ch = primal[0];
    const AdjointTriple& Psi0 = adjoint[0].members[0];
    const AdjointTriple& Psi1 = adjoint[0].members[1];
    Complex t = pairing.d_pairing(2, ch.profiles[0], Psi0) +
                pairing.d_pairing(1, ch.profiles[1], Psi0);
    if (std::abs(t) < 1e-12)
      throw NormalizationError("normalize_against: degenerate length-2 normalization");
    Complex C_r = pairing.d_pairing(3, ch.profiles[0], Psi0) +
                  pairing.d_pairing(2, ch.profiles[1], Psi0) +
                  pairing.d_pairing(2, ch.profiles[0], Psi1) +
                  pairing.d_pairing(1, ch.profiles[1], Psi1);
    Complex a = std::conj(1.0 / t);
    Complex b = std::conj(-C_r / (t * t));
    AdjointChain out;
    out.lambda0 = adjoint[0].lambda0;
    out.members = {combine(Psi0, a, Psi0, Complex(0.0)), combine(Psi1, a, Psi0, b)};
    std::vector<AdjointChain> res{out};
    double resid = norm_pattern_residual(primal, res, pairing);
    if (resid > 1e-8)
      throw NormalizationError("normalize_against: pattern residual " + format_g17(resid));
    return res;
  }

  throw CapabilityError("normalize_against: chain lengths beyond 2 are not supported");
}

// --- adjoint power solutions ---------------------------------------------------

/// Log-power adjoint solution: densities with the exponent
/// i conj(lambda0) + 2m - 2 and boundary weights with i conj(lambda0) + m_row - 1.
struct AdjointPowerSolution {
  Complex lambda0; // primal eigenvalue
  int m = 1;
  std::vector<PiecewiseExpPoly> psi;          // psi^{(0..K)}, chain order
  std::vector<std::array<Complex, 2>> chi;    // aligned with psi
  std::array<int, 2> row_orders{0, 0};
  bool has_weights = true;

  int log_degree() const { return static_cast<int>(psi.size()) - 1; }
  Complex density_exponent() const { return kI * std::conj(lambda0) + (2.0 * m - 2.0); }
  Complex weight_exponent(int row) const {
    return kI * std::conj(lambda0) + (row_orders[row] - 1.0);
  }

  Complex eval(int k, double omega, double r) const {
    Complex s(0.0);
    for (int q = 0; q <= k; ++q) s += log_power_factor(r, q) * psi[k - q].eval(omega);
    return std::exp(density_exponent() * std::log(r)) * s;
  }

  Complex eval_top(double omega, double r) const { return eval(log_degree(), omega, r); }

  /// d/dr of member k.
  Complex eval_dr(int k, double omega, double r) const {
    Complex s = density_exponent() * eval(k, omega, r);
    if (k >= 1) s += kI * eval(k - 1, omega, r);
    return s / r;
  }

  Complex weight_value(int k, int row, double r) const {
    if (!has_weights) return Complex(0.0);
    Complex s(0.0);
    for (int q = 0; q <= k; ++q) s += log_power_factor(r, q) * chi[k - q][row];
    return std::exp(weight_exponent(row) * std::log(r)) * s;
  }
};

/// Assemble the adjoint power solution from a normalized chain at the angle.
inline AdjointPowerSolution adjoint_power(const AnglePencil& p, const AdjointChain& chain,
                                          int m = 1) {
  AdjointPowerSolution v;
  v.lambda0 = chain.lambda0;
  v.m = m;
  for (int row = 0; row < 2; ++row) v.row_orders[row] = p.rows()[row].order();
  for (const AdjointTriple& tr : chain.members) {
    v.psi.push_back(tr.psi);
    v.chi.push_back(tr.chi);
  }
  return v;
}

/// Periodic variant: densities only.
inline AdjointPowerSolution adjoint_power(const AdjointChain& chain, int m = 1) {
  AdjointPowerSolution v;
  v.lambda0 = chain.lambda0;
  v.m = m;
  v.has_weights = false;
  for (const AdjointTriple& tr : chain.members) {
    v.psi.push_back(tr.psi);
    v.chi.push_back(tr.chi);
  }
  return v;
}

// --- the coupled adjoint particular solution -------------------------------------

namespace detail {

/// Wrap an angle theta into [0, 2 pi).
inline double wrap_angle(double th) {
  double t = std::fmod(th, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

/// Piecewise density on the circle from a branch x defined on
/// (theta*, theta* + 2 pi): piece [theta*, 2 pi] takes x, piece [0, theta*]
/// takes x(. + 2 pi).
inline PiecewiseExpPoly circle_from_branch(const ExpPoly& x_branch, double theta) {
  if (theta < 1e-12) {
    return PiecewiseExpPoly::single(x_branch.with_domain(0.0, 2.0 * kPi));
  }
  std::vector<PiecewiseExpPoly::Piece> pieces;
  pieces.push_back({0.0, theta, x_branch.shifted_argument(2.0 * kPi, 0.0, theta)});
  pieces.push_back({theta, 2.0 * kPi, x_branch.with_domain(theta, 2.0 * kPi)});
  return PiecewiseExpPoly(std::move(pieces));
}

inline PiecewiseExpPoly project_out_mode(const PiecewiseExpPoly& f, int n) {
  ExpPoly mode = ExpPoly::term(1.0, 0, Complex(0.0, static_cast<double>(n)), 0.0, 2.0 * kPi);
  Complex coeff = f.inner_with(mode) / (2.0 * kPi);
  return f + PiecewiseExpPoly::single(mode * (-coeff));
}

} // namespace detail

/// Adjoint particular density at the interior pole satisfying, weakly,
/// <Lap u, v21> = -e1 int u(theta*, r) conj(chi r^{i conj(l1) - 1}) dr for all
/// test fields u.  Non-resonant when conj(lambda1) is not in the periodic
/// spectrum; otherwise the log degree is extended and the free rotating-mode
/// component is projected out (minimal selection).
inline AdjointPowerSolution solve_v21(const PeriodicPencil&, const AdjointTriple& triple1,
                                      const Coupling& coupling, bool resonant_mode = false) {
  if (coupling.m_row != 0)
    throw CapabilityError("solve_v21: only order-0 couplings are supported");
  Complex mu = std::conj(triple1.lambda0);
  double theta = detail::wrap_angle(coupling.theta_star);
  Complex chi = triple1.chi[0];
  Complex J = -std::conj(coupling.e1) * chi;

  AdjointPowerSolution v;
  v.lambda0 = triple1.lambda0;
  v.m = 1;
  v.has_weights = false;

  if (coupling.e1 == Complex(0.0)) {
    v.psi = {PiecewiseExpPoly::single(ExpPoly::zero(0.0, 2.0 * kPi))};
    v.chi = {{Complex(0.0), Complex(0.0)}};
    return v;
  }

  int n_round = static_cast<int>(std::lround(mu.imag()));
  bool resonant = std::abs(mu - Complex(0.0, static_cast<double>(n_round))) < 1e-8;
  if (resonant && !resonant_mode)
    throw ResonanceError("solve_v21: conj(lambda1) lies in the periodic spectrum; request "
                         "resonant mode");

  if (!resonant) {
    // rho = -J G(w - theta), G(t) = cosh(mu (t - pi)) / (2 mu sinh(mu pi))
    Complex denom = 2.0 * mu * std::sinh(mu * kPi);
    ExpPoly branch =
        ExpPoly::cosh_profile(mu, theta + kPi, theta, theta + 2.0 * kPi) * (-J / denom);
    v.psi = {detail::circle_from_branch(branch, theta)};
    v.chi = {{Complex(0.0), Complex(0.0)}};
    return v;
  }

  if (n_round != 0) {
    int n0 = std::abs(n_round);
    Complex in0(0.0, static_cast<double>(n0));
    Complex A = -J * std::exp(-in0 * theta) / (4.0 * kPi * mu);
    Complex B = -J * std::exp(in0 * theta) / (4.0 * kPi * mu);
    ExpPoly rho1 = ExpPoly::term(A, 0, in0, 0.0, 2.0 * kPi) +
                   ExpPoly::term(B, 0, -in0, 0.0, 2.0 * kPi);
    // branch particular: (mu / (i n0)) [A w e^{i n0 w} - B w e^{-i n0 w}]
    Complex fac = mu / in0;
    ExpPoly branch = ExpPoly::term(fac * A, 1, in0, theta, theta + 2.0 * kPi) +
                     ExpPoly::term(-fac * B, 1, -in0, theta, theta + 2.0 * kPi);
    PiecewiseExpPoly rho0 = detail::circle_from_branch(branch, theta);
    rho0 = detail::project_out_mode(rho0, n0);
    rho0 = detail::project_out_mode(rho0, -n0);
    v.psi = {PiecewiseExpPoly::single(rho1), rho0}; // psi^{(0)} = rho1, psi^{(1)} = rho0
    v.chi = {{Complex(0.0), Complex(0.0)}, {Complex(0.0), Complex(0.0)}};
    return v;
  }

  // mu = 0: quadratic extension
  ExpPoly rho2 = ExpPoly::constant(-J / (2.0 * kPi), 0.0, 2.0 * kPi);
  ExpPoly rho1 = ExpPoly::zero(0.0, 2.0 * kPi);
  Complex d = J * (theta + kPi) / (2.0 * kPi);
  ExpPoly branch = ExpPoly({ExpTerm{-J / (4.0 * kPi), Complex(0.0), 2},
                            ExpTerm{d, Complex(0.0), 1}},
                           theta, theta + 2.0 * kPi);
  PiecewiseExpPoly rho0 = detail::circle_from_branch(branch, theta);
  rho0 = detail::project_out_mode(rho0, 0);
  v.psi = {PiecewiseExpPoly::single(rho2), PiecewiseExpPoly::single(rho1), rho0};
  v.chi = {{Complex(0.0), Complex(0.0)}, {Complex(0.0), Complex(0.0)},
           {Complex(0.0), Complex(0.0)}};
  return v;
}

} // namespace pencil
