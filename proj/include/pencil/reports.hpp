#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pencil/config.hpp"
#include "pencil/extract.hpp"
#include "pencil/sectorfd.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Json kappa_report_json(const KappaReport& rep) {
  Json j;
  j["strip"] = {{"a", rep.strip.a},
                {"a1", rep.strip.a1},
                {"l", rep.strip.l},
                {"m", rep.strip.m},
                {"im_lo", rep.strip.im_lo()},
                {"im_hi", rep.strip.im_hi()}};
  j["re_bound"] = rep.re_bound;
  Json entries = Json::array();
  for (const StripEntry& e : rep.entries) {
    Json je;
    je["lambda"] = complex_json(e.lambda);
    je["multiplicity"] = e.multiplicity;
    je["partial_multiplicities"] = e.partial;
    je["pencil"] = e.pencil;
    entries.push_back(je);
  }
  j["eigenvalues"] = entries;
  j["kappa"] = rep.kappa;
  j["statement"] = rep.statement;
  j["notes"] = "periodic eigenvalues count with the coupled-mode convention: "
               "1 per nonzero i*n, 2 for the logarithmic chain at 0";
  return j;
}

inline Json expoly_json(const ExpPoly& f) {
  Json terms = Json::array();
  for (const ExpTerm& t : f.terms())
    terms.push_back({{"coeff", complex_json(t.coeff)},
                     {"mu", complex_json(t.mu)},
                     {"power", t.power}});
  return {{"domain", {f.lo(), f.hi()}}, {"terms", terms}};
}

inline Json chains_json(const Complex& lambda, const std::vector<int>& partial,
                        const std::vector<ProfileChain>& chains) {
  Json j;
  j["lambda"] = complex_json(lambda);
  j["partial_multiplicities"] = partial;
  Json jc = Json::array();
  for (const ProfileChain& c : chains) {
    Json members = Json::array();
    for (const ExpPoly& phi : c.profiles) members.push_back(expoly_json(phi));
    jc.push_back(members);
  }
  j["chains"] = jc;
  return j;
}

struct ExtractionReport {
  std::vector<std::vector<Complex>> c1, c2; // functional route, chain-major
  std::vector<Complex> fit_c1;              // fit route, basis order (u1, u12...)
  std::string method = "both";
  double fit_residual = 0.0;
  double fit_condition = 0.0;
  double cross_discrepancy = 0.0; // functional vs fit on the leading coefficient
  A12Result a12;
  bool has_a12 = false;
};

inline Json extraction_report_json(const ExtractionReport& rep) {
  Json j;
  auto blocks = [](const std::vector<std::vector<Complex>>& v) {
    Json out = Json::array();
    for (const auto& chain : v) {
      Json jc = Json::array();
      for (const Complex& c : chain) jc.push_back(complex_json(c));
      out.push_back(jc);
    }
    return out;
  };
  j["c1"] = blocks(rep.c1);
  j["c2"] = blocks(rep.c2);
  Json fit = Json::array();
  for (const Complex& c : rep.fit_c1) fit.push_back(complex_json(c));
  j["fit_coefficients"] = fit;
  j["method"] = rep.method;
  j["residuals"] = {{"fit_residual", rep.fit_residual},
                    {"fit_condition", rep.fit_condition},
                    {"cross_discrepancy", rep.cross_discrepancy}};
  if (rep.has_a12) {
    Json ja;
    ja["epsilons"] = rep.a12.epsilons;
    Json vals = Json::array();
    for (const Complex& v : rep.a12.values) vals.push_back(complex_json(v));
    ja["values"] = vals;
    ja["limit"] = complex_json(rep.a12.limit);
    ja["model_residual"] = rep.a12.model_residual;
    ja["loglog_slope"] = rep.a12.loglog_slope;
    ja["diverged"] = rep.a12.diverged;
    j["a12"] = ja;
  }
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

inline void write_json(const std::string& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

/// CSV cell formatting uses 17 significant digits so reports are
/// byte-identical across runs and round-trip exactly.
inline std::string csv_num(double x) { return format_g17(x); }

inline std::string spectrum_csv(const std::vector<EigenvalueInfo>& eigs,
                                const std::vector<std::vector<int>>& partials) {
  std::string out = "re,im,alg_mult,partial_mults\n";
  for (size_t i = 0; i < eigs.size(); ++i) {
    out += csv_num(eigs[i].lambda.real()) + "," + csv_num(eigs[i].lambda.imag()) + "," +
           std::to_string(eigs[i].multiplicity) + ",";
    for (size_t k = 0; k < partials[i].size(); ++k) {
      if (k) out += ";";
      out += std::to_string(partials[i][k]);
    }
    out += "\n";
  }
  return out;
}

inline std::string power_samples_csv(const PowerSolution& u, double omega_lo, double omega_hi,
                                     int n_omega, double r_lo, double r_hi, int n_r) {
  std::string out = "omega,r,re,im\n";
  for (int i = 0; i <= n_omega; ++i) {
    double w = omega_lo + (omega_hi - omega_lo) * i / n_omega;
    for (int jj = 0; jj <= n_r; ++jj) {
      double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(jj) / n_r);
      Complex v = u.eval(w, r);
      out += csv_num(w) + "," + csv_num(r) + "," + csv_num(v.real()) + "," +
             csv_num(v.imag()) + "\n";
    }
  }
  return out;
}

inline std::string convergence_csv(const MMSStudy& study) {
  std::string out = "grid,h,max_error,observed_order,c1_re,c1_im,c2_re,c2_im\n";
  for (const MMSRow& row : study.rows) {
    Complex c1 = row.fit_coefficients.size() > 0 ? row.fit_coefficients[0] : Complex(0.0);
    Complex c2 = row.fit_coefficients.size() > 1 ? row.fit_coefficients[1] : Complex(0.0);
    out += std::to_string(row.n) + "," + csv_num(row.h) + "," + csv_num(row.max_error) + "," +
           csv_num(row.observed_order) + "," + csv_num(c1.real()) + "," + csv_num(c1.imag()) +
           "," + csv_num(c2.real()) + "," + csv_num(c2.imag()) + "\n";
  }
  return out;
}

} // namespace pencil
