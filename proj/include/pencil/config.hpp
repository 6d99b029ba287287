#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "pencil/core.hpp"
#include "pencil/pencil.hpp"
#include "pencil/singular.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

using Json = nlohmann::ordered_json;

/// Full problem description loaded from JSON; every invariant of the
/// referenced types is re-checked on load and unknown keys are rejected.
struct ProblemConfig {
  double b1 = 0.0, b2 = kPi;
  BoundaryRow row_lower{Arm::Lower, {Complex(1.0), Complex(0.0)}, std::nullopt};
  BoundaryRow row_upper{Arm::Upper, {Complex(1.0), Complex(0.0)}, std::nullopt};
  Coupling coupling{Complex(1.0), 0.0, 0};
  Complex lambda2{0.0, 1.0}; // interior-pole eigenvalue driving the coupling
  WeightStrip weight = WeightStrip::from_im_bounds(1.0, 1.9);
  double re_bound = 10.0;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  // solver
  int n_rho = 64, n_omega = 64;
  double rho0 = -3.0, rho1 = 0.5;
  bool aligned = true;
  // cutoffs (r_in, r_out) per pole
  double eta1_in = 0.5, eta1_out = 1.0;
  double eta2_in = 0.35, eta2_out = 0.7;
  // manufactured coefficients for the extraction round trip
  Complex man_c1{1.0, 0.0}, man_c2{1.0, 0.0};

  AnglePencil pencil() const { return AnglePencil(b1, b2, row_lower, row_upper); }
  Cutoff eta1() const { return Cutoff(eta1_in, eta1_out); }
  Cutoff eta2() const { return Cutoff(eta2_in, eta2_out); }
};

namespace detail {

inline void expect_keys(const Json& j, const std::string& where,
                        const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

inline double get_num(const Json& j, const std::string& where, const std::string& key,
                      std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + key + "' in " + where);
  }
  if (!j.at(key).is_number())
    throw ConfigError("config: field '" + key + "' in " + where + " must be a number");
  return j.at(key).get<double>();
}

inline Complex get_complex(const Json& j, const std::string& where, const std::string& key,
                           std::optional<Complex> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + key + "' in " + where);
  }
  const Json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError("config: field '" + key + "' in " + where + " must be [re, im]");
  return Complex(v[0].get<double>(), v[1].get<double>());
}

inline BoundaryRow parse_row(const Json& j, const std::string& where) {
  expect_keys(j, where, {"endpoint", "alpha", "nonlocal", "order"});
  BoundaryRow row;
  std::string ep = j.value("endpoint", std::string());
  if (ep == "b1")
    row.endpoint = Arm::Lower;
  else if (ep == "b2")
    row.endpoint = Arm::Upper;
  else
    throw ConfigError("config: field 'endpoint' in " + where + " must be \"b1\" or \"b2\"");
  if (!j.contains("alpha") || !j.at("alpha").is_array() || j.at("alpha").size() != 2)
    throw ConfigError("config: field 'alpha' in " + where +
                      " must be a pair of complex numbers");
  {
    const Json& a = j.at("alpha");
    auto entry = [&](int i) {
      const Json& v = a.at(i);
      if (!v.is_array() || v.size() != 2)
        throw ConfigError("config: 'alpha' entries in " + where + " must be [re, im]");
      return Complex(v[0].get<double>(), v[1].get<double>());
    };
    row.alpha[0] = entry(0);
    row.alpha[1] = entry(1);
  }
  if (row.alpha[0] == Complex(0.0) && row.alpha[1] == Complex(0.0))
    throw ConfigError("config: row " + where + " violates (alpha0, alpha1) != (0, 0)");
  if (j.contains("nonlocal")) {
    const Json& n = j.at("nonlocal");
    expect_keys(n, where + ".nonlocal", {"e", "shift", "beta", "order", "tau"});
    NonlocalTerm t;
    t.e = get_complex(n, where + ".nonlocal", "e");
    t.shift = get_num(n, where + ".nonlocal", "shift");
    t.beta = get_num(n, where + ".nonlocal", "beta", 1.0);
    t.order = static_cast<int>(get_num(n, where + ".nonlocal", "order", 0.0));
    if (!(t.beta > 0.0))
      throw ConfigError("config: 'beta' in " + where + ".nonlocal must be positive");
    if (n.contains("tau")) {
      const Json& a = n.at("tau");
      if (!a.is_array() || a.size() != 2)
        throw ConfigError("config: 'tau' in " + where + ".nonlocal must be a pair");
      t.tau[0] = Complex(a[0][0].get<double>(), a[0][1].get<double>());
      t.tau[1] = Complex(a[1][0].get<double>(), a[1][1].get<double>());
    }
    row.nonlocal = t;
  }
  return row;
}

} // namespace detail

inline ProblemConfig parse_config(const Json& j) {
  detail::expect_keys(j, "top level",
                      {"geometry", "rows", "coupling", "lambda2", "weight", "search", "solver",
                       "cutoffs", "manufactured"});
  ProblemConfig cfg;
  if (!j.contains("geometry")) throw ConfigError("config: missing 'geometry'");
  const Json& g = j.at("geometry");
  detail::expect_keys(g, "geometry", {"b1", "b2"});
  cfg.b1 = detail::get_num(g, "geometry", "b1");
  cfg.b2 = detail::get_num(g, "geometry", "b2");
  if (!(0.0 <= cfg.b1 && cfg.b1 < cfg.b2 && cfg.b2 < 2.0 * kPi))
    throw ConfigError("config: geometry violates 0 <= b1 < b2 < 2*pi");

  if (!j.contains("rows") || !j.at("rows").is_array() || j.at("rows").size() != 2)
    throw ConfigError("config: 'rows' must be an array of exactly two rows");
  cfg.row_lower = detail::parse_row(j.at("rows")[0], "rows[0]");
  cfg.row_upper = detail::parse_row(j.at("rows")[1], "rows[1]");

  if (j.contains("coupling")) {
    const Json& c = j.at("coupling");
    detail::expect_keys(c, "coupling", {"e1", "theta_star", "m_row"});
    cfg.coupling.e1 = detail::get_complex(c, "coupling", "e1", Complex(1.0));
    cfg.coupling.theta_star = detail::get_num(c, "coupling", "theta_star", 0.0);
    cfg.coupling.m_row = static_cast<int>(detail::get_num(c, "coupling", "m_row", 0.0));
    if (cfg.coupling.m_row != 0 && cfg.coupling.m_row != 1)
      throw ConfigError("config: 'm_row' in coupling must be 0 or 1");
  }
  if (j.contains("lambda2")) cfg.lambda2 = detail::get_complex(j, "top level", "lambda2");

  if (j.contains("weight")) {
    const Json& w = j.at("weight");
    detail::expect_keys(w, "weight", {"a", "a1", "l", "m", "relaxed"});
    WeightStrip s;
    s.a = detail::get_num(w, "weight", "a");
    s.a1 = detail::get_num(w, "weight", "a1");
    s.l = static_cast<int>(detail::get_num(w, "weight", "l", 0.0));
    s.m = static_cast<int>(detail::get_num(w, "weight", "m", 1.0));
    s.relaxed = w.value("relaxed", false);
    s.validate();
    cfg.weight = s;
  }
  if (j.contains("search")) {
    const Json& s = j.at("search");
    detail::expect_keys(s, "search", {"re_bound", "epsilons"});
    cfg.re_bound = detail::get_num(s, "search", "re_bound", 10.0);
    if (!(cfg.re_bound > 0.0)) throw ConfigError("config: 're_bound' must be positive");
    if (s.contains("epsilons")) {
      cfg.epsilons.clear();
      for (const auto& e : s.at("epsilons")) cfg.epsilons.push_back(e.get<double>());
    }
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    detail::expect_keys(s, "solver", {"n_rho", "n_omega", "rho0", "rho1", "aligned"});
    cfg.n_rho = static_cast<int>(detail::get_num(s, "solver", "n_rho", 64.0));
    cfg.n_omega = static_cast<int>(detail::get_num(s, "solver", "n_omega", 64.0));
    cfg.rho0 = detail::get_num(s, "solver", "rho0", -3.0);
    cfg.rho1 = detail::get_num(s, "solver", "rho1", 0.5);
    cfg.aligned = s.value("aligned", true);
    if (cfg.n_rho < 4 || cfg.n_omega < 4)
      throw ConfigError("config: solver grid counts must be at least 4");
    if (!(cfg.rho0 < cfg.rho1)) throw ConfigError("config: solver needs rho0 < rho1");
  }
  if (j.contains("cutoffs")) {
    const Json& c = j.at("cutoffs");
    detail::expect_keys(c, "cutoffs", {"eta1", "eta2"});
    auto pair = [&](const char* key, double& rin, double& rout) {
      if (!c.contains(key)) return;
      const Json& v = c.at(key);
      if (!v.is_array() || v.size() != 2)
        throw ConfigError(std::string("config: '") + key + "' must be [r_in, r_out]");
      rin = v[0].get<double>();
      rout = v[1].get<double>();
      if (!(0.0 < rin && rin < rout))
        throw ConfigError(std::string("config: '") + key + "' violates 0 < r_in < r_out");
    };
    pair("eta1", cfg.eta1_in, cfg.eta1_out);
    pair("eta2", cfg.eta2_in, cfg.eta2_out);
  }
  if (j.contains("manufactured")) {
    const Json& m = j.at("manufactured");
    detail::expect_keys(m, "manufactured", {"c1", "c2"});
    cfg.man_c1 = detail::get_complex(m, "manufactured", "c1", Complex(1.0));
    cfg.man_c2 = detail::get_complex(m, "manufactured", "c2", Complex(1.0));
  }
  // cross-validation: the pencil constructor re-checks geometric invariants
  cfg.pencil();
  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

} // namespace pencil
