#pragma once

#include "pencil/adjoint.hpp"
#include "pencil/config.hpp"
#include "pencil/extract.hpp"

namespace pencil {

/// Everything the coupled machinery needs, assembled once from a config:
/// the vertex eigen-pair (primal chain + normalized adjoint), the
/// interior-pole family at lambda2, the trace data and its particular
/// solution, and the two adjoint power solutions.
struct CoupledWorkspace {
  AnglePencil pencil;
  Coupling coupling;
  Complex lambda1, lambda2;
  JordanChainSet primal1;
  std::vector<AdjointChain> adjoint1;  // normalized against primal1
  std::vector<ProfileChain> primal2;   // periodic chains at lambda2
  std::vector<AdjointChain> adjoint2;  // normalized periodic chains
  PowerSolution u1;                    // first vertex chain member
  std::vector<PowerSolution> u2_family;
  SpecialRHS f12;                      // trace of u2_family.front()
  U12Solution u12;
  std::vector<U12Solution> u12_family; // aligned with u2_family
  AdjointPowerSolution v1;
  AdjointPowerSolution v21;
  bool resonant = false;
};

/// Pick the vertex eigenvalue: the lowest simple eigenvalue inside the
/// weight strip.
inline Complex select_lambda1(const AnglePencil& p, const WeightStrip& strip, double re_bound) {
  auto eigs = find_eigenvalues(p, strip, re_bound);
  if (eigs.empty())
    throw NumericalError("workspace: no pencil eigenvalue inside the weight strip");
  return eigs.front().lambda;
}

inline CoupledWorkspace build_workspace(const ProblemConfig& cfg) {
  CoupledWorkspace ws{cfg.pencil(), cfg.coupling, Complex(0.0), cfg.lambda2,
                      {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, false};
  ws.lambda1 = select_lambda1(ws.pencil, cfg.weight, cfg.re_bound);

  ws.primal1 = jordan_chains(ws.pencil, ws.lambda1);
  if (ws.primal1.chains.size() != 1 || ws.primal1.chains[0].length() != 1)
    throw CapabilityError("workspace: the coupled pipeline expects a simple vertex eigenvalue");
  AdjointTriple raw = adjoint_eigenvector(ws.pencil, ws.lambda1);
  PairingProvider pairing1(ws.pencil, ws.lambda1);
  ws.adjoint1 = normalize_against(ws.primal1.chains, {AdjointChain{ws.lambda1, {raw}}},
                                  pairing1);
  ws.u1 = power_solution(ws.primal1, 0, 0, Pole::G1);
  ws.v1 = adjoint_power(ws.pencil, ws.adjoint1[0], 1);

  // interior-pole family at lambda2 (must be in the periodic spectrum)
  int n2 = static_cast<int>(std::lround(ws.lambda2.imag()));
  if (std::abs(ws.lambda2 - Complex(0.0, static_cast<double>(n2))) > 1e-12)
    throw ConfigError("workspace: lambda2 must be a periodic-pencil eigenvalue (i * integer)");
  auto evs = periodic_eigendata(n2 - 0.5, n2 + 0.5);
  ws.primal2 = evs[0].chains;
  PairingProvider pairing2(ws.lambda2);
  ws.adjoint2 = normalize_against(ws.primal2, periodic_adjoint_chains(ws.lambda2), pairing2);
  for (size_t z = 0; z < ws.primal2.size(); ++z)
    for (int k = 0; k < ws.primal2[z].length(); ++k)
      ws.u2_family.push_back(power_solution(evs[0], k, static_cast<int>(z)));

  // coupled pieces; resonance is detected from the spectra
  bool angle_resonant = std::abs(char_det(ws.pencil, ws.lambda2)) < 1e-8;
  ws.f12 = build_f12(ws.u2_family.front(), ws.coupling.e1, ws.coupling.theta_star,
                     ws.coupling.m_row);
  ws.u12 = solve_u12(ws.pencil, ws.f12, angle_resonant);
  for (const PowerSolution& u2m : ws.u2_family) {
    SpecialRHS rhs = build_f12(u2m, ws.coupling.e1, ws.coupling.theta_star, ws.coupling.m_row);
    ws.u12_family.push_back(solve_u12(ws.pencil, rhs, angle_resonant));
  }
  int n1 = static_cast<int>(std::lround(std::conj(ws.lambda1).imag()));
  bool v21_resonant =
      std::abs(std::conj(ws.lambda1) - Complex(0.0, static_cast<double>(n1))) < 1e-8;
  PeriodicPencil per;
  ws.v21 = solve_v21(per, ws.adjoint1[0].members[0], ws.coupling, v21_resonant);
  ws.resonant = angle_resonant || v21_resonant;
  return ws;
}

} // namespace pencil
