// Command-line front end: spectrum / chains / power / adjoint / u12 / kappa /
// extract / a12 / solve-fd / verify over a JSON problem config.
//
// Exit codes: 0 success, 1 input error, 2 failed verification, 3 numerical
// failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "pencil/reports.hpp"
#include "pencil/verify.hpp"
#include "pencil/workspace.hpp"

namespace fs = std::filesystem;
using namespace pencil;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string strip;      // "a1,a" override
  double re_bound = -1.0; // override when > 0
  std::string grid;       // "n_rho,n_omega" override
  std::string epsilons;   // "e1,e2,..." override
  bool resonant = false;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(std::string("invalid ") + what + " list: '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

ProblemConfig effective_config(const CliOptions& opt) {
  ProblemConfig cfg = load_config(opt.config_path);
  if (!opt.strip.empty()) {
    std::vector<double> s = parse_list(opt.strip, "--strip");
    if (s.size() != 2) throw ConfigError("--strip expects a1,a");
    WeightStrip ws;
    ws.a1 = s[0];
    ws.a = s[1];
    ws.l = cfg.weight.l;
    ws.m = cfg.weight.m;
    ws.relaxed = true;
    ws.validate();
    cfg.weight = ws;
  }
  if (opt.re_bound > 0.0) cfg.re_bound = opt.re_bound;
  if (!opt.grid.empty()) {
    std::vector<double> g = parse_list(opt.grid, "--grid");
    if (g.size() != 2) throw ConfigError("--grid expects n_rho,n_omega");
    cfg.n_rho = static_cast<int>(g[0]);
    cfg.n_omega = static_cast<int>(g[1]);
  }
  if (!opt.epsilons.empty()) cfg.epsilons = parse_list(opt.epsilons, "--epsilons");
  return cfg;
}

std::string out_path(const CliOptions& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  return (fs::path(opt.out_dir) / name).string();
}

int cmd_spectrum(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  AnglePencil p = cfg.pencil();
  auto eigs = find_eigenvalues(p, cfg.weight, cfg.re_bound);
  std::vector<std::vector<int>> partials;
  for (const auto& ev : eigs) {
    try {
      partials.push_back(local_smith(p, ev.lambda).partial);
    } catch (const Error&) {
      partials.push_back({ev.multiplicity});
    }
  }
  std::string path = out_path(opt, "spectrum.csv");
  write_text(path, spectrum_csv(eigs, partials));
  std::cout << "wrote " << path << " (" << eigs.size() << " eigenvalues)\n";
  return 0;
}

int cmd_chains(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  AnglePencil p = cfg.pencil();
  auto eigs = find_eigenvalues(p, cfg.weight, cfg.re_bound);
  Json out = Json::array();
  for (const auto& ev : eigs) {
    JordanChainSet set = jordan_chains(p, ev.lambda);
    Json j = chains_json(ev.lambda, set.partial_mults(), set.chains);
    j["chain_relation_residual"] = chain_residual(p, set);
    out.push_back(j);
  }
  std::string path = out_path(opt, "chains.json");
  write_json(path, out);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_power(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  AnglePencil p = cfg.pencil();
  auto eigs = find_eigenvalues(p, cfg.weight, cfg.re_bound);
  if (eigs.empty()) throw NumericalError("power: no eigenvalue inside the strip");
  JordanChainSet set = jordan_chains(p, eigs.front().lambda);
  PowerSolution u = power_solution(set, 0, 0, Pole::G1);
  std::string path = out_path(opt, "power.csv");
  write_text(path, power_samples_csv(u, p.b1(), p.b2(), 32, 0.05, 2.0, 32));
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_adjoint(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  CoupledWorkspace ws = build_workspace(cfg);
  const AdjointTriple& tr = ws.adjoint1[0].members[0];
  Json j;
  j["lambda"] = complex_json(ws.lambda1);
  j["chi"] = Json::array({complex_json(tr.chi[0]), complex_json(tr.chi[1])});
  Json pieces = Json::array();
  for (const auto& piece : tr.psi.pieces()) pieces.push_back(expoly_json(piece.f));
  j["psi_pieces"] = pieces;
  PairingProvider pairing(ws.pencil, ws.lambda1);
  j["normalization_residual"] =
      norm_pattern_residual(ws.primal1.chains, ws.adjoint1, pairing);
  j["reduced_pairing"] =
      complex_json(reduced_pairing(ws.lambda1, ws.primal1.chains[0].profiles[0], tr));
  std::string path = out_path(opt, "adjoint.json");
  write_json(path, j);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_u12(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  AnglePencil p = cfg.pencil();
  PowerSolution u2{cfg.lambda2, {ExpPoly::constant(1.0, 0.0, 2.0 * kPi)}, Pole::G2};
  SpecialRHS rhs = build_f12(u2, cfg.coupling.e1, cfg.coupling.theta_star, cfg.coupling.m_row);
  bool near_eigen = std::abs(char_det(p, cfg.lambda2)) < 1e-8;
  U12Solution sol = solve_u12(p, rhs, opt.resonant || near_eigen);
  Json j;
  j["lambda2"] = complex_json(cfg.lambda2);
  j["resonant"] = sol.resonant;
  j["extension"] = sol.extension;
  j["selection"] = sol.selection;
  j["residual"] = u12_residual(p, sol.u, rhs, {0.3, 1.0, 2.5});
  Json profiles = Json::array();
  for (const ExpPoly& phi : sol.u.profiles) profiles.push_back(expoly_json(phi));
  j["profiles"] = profiles;
  write_json(out_path(opt, "u12.json"), j);
  write_text(out_path(opt, "u12_samples.csv"),
             power_samples_csv(sol.u, p.b1(), p.b2(), 32, 0.05, 2.0, 32));
  std::cout << "wrote " << out_path(opt, "u12.json") << "\n";
  return 0;
}

int cmd_kappa(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  AnglePencil p = cfg.pencil();
  PeriodicPencil per;
  KappaReport rep = kappa_report(cfg.weight, p, per, cfg.re_bound);
  std::string path = out_path(opt, "kappa.json");
  write_json(path, kappa_report_json(rep));
  std::cout << "wrote " << path << " (kappa = " << rep.kappa << ")\n";
  return 0;
}

int cmd_extract(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  CoupledWorkspace ws = build_workspace(cfg);
  Complex c1 = cfg.man_c1, c2 = cfg.man_c2;
  FieldFn u_g1 = [&](double w, double r) {
    return c1 * ws.u1.eval(w, r) + c2 * ws.u12.u.eval(w, r);
  };
  FieldFn u_g2 = [&](double w, double r) { return c2 * ws.u2_family.front().eval(w, r); };
  Cutoff eta1 = cfg.eta1(), eta2 = cfg.eta2();

  ExtractionReport rep;
  rep.c2 = extract_c2_functional(u_g2, ws.adjoint2, eta2);
  std::vector<std::vector<PowerSolution>> u12s;
  for (const auto& sol : ws.u12_family) u12s.push_back({sol.u});
  rep.c1 = extract_c1_functional(ws.pencil, u_g1, rep.c2, u12s, ws.adjoint1, eta1);
  SampledField field = SampledField::sample(u_g1, Pole::G1, ws.pencil.b1(), ws.pencil.b2(),
                                            0.2 * eta1.r_in(), 1.2 * eta1.r_out(), 24, 24);
  FitResult fit = extract_fit(field, {ws.u1, ws.u12.u}, 2);
  rep.fit_c1 = fit.coefficients;
  rep.fit_residual = fit.residual_norm;
  rep.fit_condition = fit.condition;
  rep.cross_discrepancy = std::abs(rep.c1[0][0] - fit.coefficients[0]);
  A12Setup setup{ws.pencil, ws.coupling, ws.u2_family.front(), ws.u12.u, ws.f12,
                 ws.v1,     ws.v21,      cfg.eta1(),           cfg.eta2()};
  rep.a12 = a12_trace(setup, cfg.epsilons);
  rep.has_a12 = true;
  std::string path = out_path(opt, "extract.json");
  write_json(path, extraction_report_json(rep));
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_a12(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  CoupledWorkspace ws = build_workspace(cfg);
  A12Setup setup{ws.pencil, ws.coupling, ws.u2_family.front(), ws.u12.u, ws.f12,
                 ws.v1,     ws.v21,      cfg.eta1(),           cfg.eta2()};
  A12Result res = a12_trace(setup, cfg.epsilons);
  Json j;
  j["epsilons"] = res.epsilons;
  Json vals = Json::array();
  for (const Complex& v : res.values) vals.push_back(complex_json(v));
  j["values"] = vals;
  j["limit"] = complex_json(res.limit);
  j["model_residual"] = res.model_residual;
  j["loglog_slope"] = res.loglog_slope;
  j["diverged"] = res.diverged;
  std::string path = out_path(opt, "a12.json");
  write_json(path, j);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_solve_fd(const CliOptions& opt) {
  ProblemConfig cfg = effective_config(opt);
  if (!cfg.row_upper.nonlocal) throw ConfigError("solve-fd: config must carry a nonlocal row");
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
  grid.rho0 = cfg.rho0;
  grid.rho1 = cfg.rho1;
  grid.aligned = cfg.aligned;
  const NonlocalTerm& t = *cfg.row_upper.nonlocal;
  std::vector<int> ladder{std::max(8, cfg.n_rho / 4), std::max(16, cfg.n_rho / 2), cfg.n_rho};
  MMSStudy study = mms_study(grid, t.e, t.shift, t.beta, u_exact, lap, ladder, ext);
  std::string path = out_path(opt, "convergence.csv");
  write_text(path, convergence_csv(study));
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_verify(const CliOptions& opt) {
  (void)opt;
  VerificationSummary summary = run_verification();
  for (const CriterionResult& r : summary.results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name
              << " (" << format_g17(r.seconds) << " s)";
    if (!r.pass) std::cout << " -- " << r.detail;
    std::cout << "\n";
  }
  std::cout << (summary.all_pass ? "verification OK" : "verification FAILED") << " in "
            << format_g17(summary.total_seconds) << " s\n";
  return summary.all_pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"corner-singularity toolkit for nonlocal elliptic problems"};
  app.require_subcommand(1);
  app.fallthrough(); // global options may follow the subcommand

  CliOptions opt;
  app.add_option("--config", opt.config_path, "problem config (JSON)");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--strip", opt.strip, "weight pair a1,a (relaxed strip)");
  app.add_option("--re-bound", opt.re_bound, "search half-width in Re lambda");
  app.add_option("--grid", opt.grid, "solver grid n_rho,n_omega");
  app.add_option("--epsilons", opt.epsilons, "epsilon list for the coupling trace");
  app.add_flag("--resonant", opt.resonant, "request the resonant mode explicitly");

  std::map<std::string, std::function<int(const CliOptions&)>> commands{
      {"spectrum", cmd_spectrum}, {"chains", cmd_chains}, {"power", cmd_power},
      {"adjoint", cmd_adjoint},   {"u12", cmd_u12},       {"kappa", cmd_kappa},
      {"extract", cmd_extract},   {"a12", cmd_a12},       {"solve-fd", cmd_solve_fd},
      {"verify", cmd_verify}};
  for (auto& [name, fn] : commands) app.add_subcommand(name, "");

  CLI11_PARSE(app, argc, argv);

  std::string chosen = app.get_subcommands().front()->get_name();
  if (chosen != "verify" && opt.config_path.empty()) {
    std::cerr << "error: --config is required for '" << chosen << "'\n";
    return 1;
  }
  try {
    return commands.at(chosen)(opt);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
