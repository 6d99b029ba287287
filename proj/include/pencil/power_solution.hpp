#pragma once

#include <vector>

#include "pencil/core.hpp"
#include "pencil/exp_poly.hpp"
#include "pencil/pencil.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

enum class Pole { G1, G2 }; // angle vertex resp. interior conjugation point

/// (i ln r)^q / q!
inline Complex log_power_factor(double r, int q) {
  Complex t = kI * std::log(r);
  Complex v(1.0);
  for (int j = 1; j <= q; ++j) v *= t / static_cast<double>(j);
  return v;
}

/// Log-power solution u^{(k)}(w, r) = r^{i lambda} sum_q (i ln r)^q/q! phi^{(k-q)}(w)
/// built from a Jordan chain.  profiles[j] stores phi^{(j)} (chain order).
struct PowerSolution {
  Complex lambda;
  std::vector<ExpPoly> profiles;
  Pole pole = Pole::G1;

  int log_degree() const { return static_cast<int>(profiles.size()) - 1; }

  Complex eval(double omega, double r) const {
    int k = log_degree();
    Complex s(0.0);
    for (int q = 0; q <= k; ++q) s += log_power_factor(r, q) * profiles[k - q].eval(omega);
    return power_ri(r, lambda) * s;
  }

  /// Partial derivative in r.  Uses (r d/dr) E_q = i lambda E_q + i E_{q-1}.
  Complex eval_dr(double omega, double r) const {
    int k = log_degree();
    Complex s(0.0);
    for (int q = 0; q <= k; ++q)
      s += kI * lambda * log_power_factor(r, q) * profiles[k - q].eval(omega);
    for (int q = 1; q <= k; ++q)
      s += kI * log_power_factor(r, q - 1) * profiles[k - q].eval(omega);
    return power_ri(r, lambda) * s / r;
  }

  Complex eval_domega(double omega, double r) const {
    int k = log_degree();
    Complex s(0.0);
    for (int q = 0; q <= k; ++q)
      s += log_power_factor(r, q) * profiles[k - q].derivative().eval(omega);
    return power_ri(r, lambda) * s;
  }

  /// The member one step down the chain (k-1), sharing profiles.
  PowerSolution lowered() const {
    if (profiles.size() <= 1) {
      PowerSolution z{lambda, {ExpPoly::zero(profiles[0].lo(), profiles[0].hi())}, pole};
      return z;
    }
    return PowerSolution{lambda, {profiles.begin(), profiles.end() - 1}, pole};
  }
};

/// Member (k, zeta) of a chain set as a power solution.
inline PowerSolution power_solution(const JordanChainSet& set, int k, int zeta, Pole pole) {
  if (zeta < 0 || zeta >= static_cast<int>(set.chains.size()))
    throw InputError("power_solution: chain index out of range");
  const ProfileChain& chain = set.chains[zeta];
  if (k < 0 || k >= chain.length())
    throw InputError("power_solution: log-degree index out of range");
  PowerSolution u;
  u.lambda = set.lambda0;
  u.pole = pole;
  u.profiles.assign(chain.profiles.begin(), chain.profiles.begin() + k + 1);
  return u;
}

inline PowerSolution power_solution(const PeriodicEigenvalue& ev, int k, int zeta) {
  if (zeta < 0 || zeta >= static_cast<int>(ev.chains.size()))
    throw InputError("power_solution: chain index out of range");
  const ProfileChain& chain = ev.chains[zeta];
  if (k < 0 || k >= chain.length())
    throw InputError("power_solution: log-degree index out of range");
  PowerSolution u;
  u.lambda = ev.lambda;
  u.pole = Pole::G2;
  u.profiles.assign(chain.profiles.begin(), chain.profiles.begin() + k + 1);
  return u;
}

namespace detail {

/// Exact coefficient functions of the interior residual of a log-power form:
/// applying (r d_r)^2 + d_w^2 to r^{i l} sum E_q c_q gives
/// r^{i l} sum E_q [c_q'' - l^2 c_q - 2 l c_{q+1} - c_{q+2}].
inline std::vector<ExpPoly> interior_residual_profiles(const Complex& lambda,
                                                       const std::vector<ExpPoly>& cq) {
  int n = static_cast<int>(cq.size());
  std::vector<ExpPoly> out;
  out.reserve(n);
  for (int q = 0; q < n; ++q) {
    ExpPoly r = cq[q].derivative().derivative() - (lambda * lambda) * cq[q];
    if (q + 1 < n) r -= 2.0 * lambda * cq[q + 1];
    if (q + 2 < n) r -= cq[q + 2];
    out.push_back(r);
  }
  return out;
}

} // namespace detail

/// Max over sampled radii of interior and boundary-row residuals of a power
/// solution under the angle pencil, normalized by max |u| on the sample set.
inline double residual(const AnglePencil& p, const PowerSolution& u,
                       const std::vector<double>& radii) {
  for (double r : radii)
    if (!(r > 0.0)) throw InputError("residual: radii must be positive");
  int k = u.log_degree();
  std::vector<ExpPoly> cq; // coefficient of E_q is phi^{(k-q)}
  for (int q = 0; q <= k; ++q) cq.push_back(u.profiles[k - q]);
  std::vector<ExpPoly> interior = detail::interior_residual_profiles(u.lambda, cq);

  // boundary rows: coefficient of E_q after applying row sigma is
  // sum_j (1/j!) (d^j row)(lambda)(c_{q+j})
  std::vector<std::array<Complex, 2>> row_coeff(k + 1);
  for (int q = 0; q <= k; ++q)
    for (int row = 0; row < 2; ++row) {
      Complex v(0.0);
      for (int j = 0; q + j <= k; ++j)
        v += row_apply_jet(p, row, u.lambda, j, cq[q + j], cq[q + j].derivative());
      row_coeff[q][row] = v;
    }

  double scale = 0.0, worst = 0.0;
  const int n_omega = 40;
  for (double r : radii) {
    for (int i = 0; i <= n_omega; ++i) {
      double w = p.b1() + (p.b2() - p.b1()) * i / n_omega;
      scale = std::max(scale, std::abs(u.eval(w, r)));
    }
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
      for (int q = 0; q <= k; ++q) v += log_power_factor(r, q) * row_coeff[q][row];
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst / scale;
}

/// Interior residual only, for the periodic pencil.
inline double residual(const PeriodicPencil&, const PowerSolution& u,
                       const std::vector<double>& radii) {
  for (double r : radii)
    if (!(r > 0.0)) throw InputError("residual: radii must be positive");
  int k = u.log_degree();
  std::vector<ExpPoly> cq;
  for (int q = 0; q <= k; ++q) cq.push_back(u.profiles[k - q]);
  std::vector<ExpPoly> interior = detail::interior_residual_profiles(u.lambda, cq);
  double scale = 0.0, worst = 0.0;
  const int n_omega = 48;
  for (double r : radii)
    for (int i = 0; i <= n_omega; ++i) {
      double w = 2.0 * kPi * i / n_omega;
      scale = std::max(scale, std::abs(u.eval(w, r)));
    }
  scale = std::max(scale, 1e-300);
  for (double r : radii)
    for (int i = 0; i <= n_omega; ++i) {
      double w = 2.0 * kPi * i / n_omega;
      Complex v(0.0);
      for (int q = 0; q <= k; ++q) v += log_power_factor(r, q) * interior[q].eval(w);
      worst = std::max(worst, std::abs(v));
    }
  return worst / scale;
}

} // namespace pencil
