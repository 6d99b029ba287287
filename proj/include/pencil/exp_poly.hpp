#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pencil/core.hpp"

namespace pencil {

/// One term c * omega^power * exp(mu*omega).
struct ExpTerm {
  Complex coeff;
  Complex mu;
  int power = 0;
};

/// Finite sum of terms c * w^j * e^{mu w} on a real interval [lo, hi].
///
/// The algebra is closed under products, differentiation and
/// antidifferentiation, so angular profiles, their inner products and the
/// particular solutions built from them are all evaluated in closed form.
class ExpPoly {
public:
  static constexpr int kMaxPower = 64;
  static constexpr double kMuMergeTol = 1e-12;

  ExpPoly() = default;
  ExpPoly(std::vector<ExpTerm> terms, double lo, double hi)
      : terms_(std::move(terms)), lo_(lo), hi_(hi) {
    if (!(lo_ < hi_)) throw InputError("ExpPoly: empty domain");
    canonicalize();
  }

  static ExpPoly zero(double lo, double hi) { return ExpPoly({}, lo, hi); }

  static ExpPoly constant(const Complex& c, double lo, double hi) {
    return ExpPoly({ExpTerm{c, Complex(0.0), 0}}, lo, hi);
  }

  static ExpPoly term(const Complex& c, int power, const Complex& mu, double lo, double hi) {
    return ExpPoly({ExpTerm{c, mu, power}}, lo, hi);
  }

  /// sin(k*(w - b)) as an exponential pair.
  static ExpPoly sin_profile(double k, double b, double lo, double hi) {
    const Complex ik(0.0, k);
    return ExpPoly({ExpTerm{std::exp(-ik * b) / (2.0 * kI), ik, 0},
                    ExpTerm{-std::exp(ik * b) / (2.0 * kI), -ik, 0}},
                   lo, hi);
  }

  /// cos(k*(w - b)).
  static ExpPoly cos_profile(double k, double b, double lo, double hi) {
    const Complex ik(0.0, k);
    return ExpPoly({ExpTerm{0.5 * std::exp(-ik * b), ik, 0},
                    ExpTerm{0.5 * std::exp(ik * b), -ik, 0}},
                   lo, hi);
  }

  /// cosh(lambda*(w - b)).
  static ExpPoly cosh_profile(const Complex& lambda, double b, double lo, double hi) {
    return ExpPoly({ExpTerm{0.5 * std::exp(-lambda * b), lambda, 0},
                    ExpTerm{0.5 * std::exp(lambda * b), -lambda, 0}},
                   lo, hi);
  }

  /// sinh(lambda*(w - b)).
  static ExpPoly sinh_profile(const Complex& lambda, double b, double lo, double hi) {
    return ExpPoly({ExpTerm{0.5 * std::exp(-lambda * b), lambda, 0},
                    ExpTerm{-0.5 * std::exp(lambda * b), -lambda, 0}},
                   lo, hi);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Complex eval(double omega) const {
    const double slack = 1e-9 * (hi_ - lo_) + 1e-12;
    if (omega < lo_ - slack || omega > hi_ + slack)
      throw DomainError("ExpPoly::eval: point outside domain");
    return eval_unchecked(omega);
  }

  Complex eval_unchecked(double omega) const {
    Complex s(0.0);
    for (const auto& t : terms_)
      s += t.coeff * ipow(omega, t.power) * std::exp(t.mu * omega);
    return s;
  }

  ExpPoly derivative() const {
    std::vector<ExpTerm> out;
    out.reserve(2 * terms_.size());
    for (const auto& t : terms_) {
      if (t.power > 0)
        out.push_back(ExpTerm{t.coeff * static_cast<double>(t.power), t.mu, t.power - 1});
      if (t.mu != Complex(0.0))
        out.push_back(ExpTerm{t.coeff * t.mu, t.mu, t.power});
    }
    return ExpPoly(std::move(out), lo_, hi_);
  }

  /// Term-wise antiderivative; exact for every term.
  ExpPoly antiderivative() const {
    std::vector<ExpTerm> out;
    for (const auto& t : terms_) {
      if (t.mu == Complex(0.0)) {
        out.push_back(ExpTerm{t.coeff / static_cast<double>(t.power + 1), t.mu, t.power + 1});
      } else {
        // int w^j e^{mu w} dw = e^{mu w} sum_{p=0..j} (-1)^{j-p} (j!/p!) w^p / mu^{j-p+1}
        double fact = 1.0; // j!/p! accumulated downward
        Complex mu_pow = t.mu;
        // build from p=j down to 0
        for (int p = t.power; p >= 0; --p) {
          double sign = ((t.power - p) % 2 == 0) ? 1.0 : -1.0;
          out.push_back(ExpTerm{t.coeff * sign * fact / mu_pow, t.mu, p});
          fact *= p; // (j!/ (p-1)!) = (j!/p!) * p
          mu_pow *= t.mu;
        }
      }
    }
    return ExpPoly(std::move(out), lo_, hi_);
  }

  /// Definite integral over [x0, x1] (within the domain).
  Complex integral(double x0, double x1) const {
    ExpPoly F = antiderivative();
    return F.eval_unchecked(x1) - F.eval_unchecked(x0);
  }

  Complex integral() const { return integral(lo_, hi_); }

  /// Conjugation maps (c, mu, j) -> (conj c, conj mu, j).
  ExpPoly conjugated() const {
    std::vector<ExpTerm> out = terms_;
    for (auto& t : out) {
      t.coeff = std::conj(t.coeff);
      t.mu = std::conj(t.mu);
    }
    return ExpPoly(std::move(out), lo_, hi_);
  }

  /// Substitute w -> w + c (result lives on the shifted domain [lo-c, hi-c]
  /// unless a target domain is given).
  ExpPoly shifted_argument(double c, double new_lo, double new_hi) const {
    std::vector<ExpTerm> out;
    for (const auto& t : terms_) {
      // (w + c)^j = sum_p binom(j,p) c^{j-p} w^p
      double binom = 1.0;
      for (int p = t.power; p >= 0; --p) {
        double cpow = std::pow(c, t.power - p);
        out.push_back(ExpTerm{t.coeff * std::exp(t.mu * c) * binom * cpow, t.mu, p});
        // binom(j, p-1) = binom(j, p) * p / (j - p + 1)
        if (p > 0) binom = binom * p / (t.power - p + 1);
      }
    }
    return ExpPoly(std::move(out), new_lo, new_hi);
  }

  ExpPoly with_domain(double lo, double hi) const {
    return ExpPoly(terms_, lo, hi);
  }

  ExpPoly& operator+=(const ExpPoly& o) {
    require_same_domain(o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
  }

  ExpPoly& operator-=(const ExpPoly& o) {
    require_same_domain(o);
    for (const auto& t : o.terms_) terms_.push_back(ExpTerm{-t.coeff, t.mu, t.power});
    canonicalize();
    return *this;
  }

  ExpPoly& operator*=(const Complex& c) {
    for (auto& t : terms_) t.coeff *= c;
    canonicalize();
    return *this;
  }

  friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) { return a += b; }
  friend ExpPoly operator-(ExpPoly a, const ExpPoly& b) { return a -= b; }
  friend ExpPoly operator*(ExpPoly a, const Complex& c) { return a *= c; }
  friend ExpPoly operator*(const Complex& c, ExpPoly a) { return a *= c; }

  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    a.require_same_domain(b);
    std::vector<ExpTerm> out;
    out.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_)
        out.push_back(ExpTerm{s.coeff * t.coeff, s.mu + t.mu, s.power + t.power});
    return ExpPoly(std::move(out), a.lo_, a.hi_);
  }

  /// Largest |value| over n equispaced samples.
  double sup_sample(int n = 64) const {
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = lo_ + (hi_ - lo_) * i / n;
      m = std::max(m, std::abs(eval_unchecked(w)));
    }
    return m;
  }

private:
  std::vector<ExpTerm> terms_;
  double lo_ = 0.0, hi_ = 1.0;

  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  void require_same_domain(const ExpPoly& o) const {
    if (std::abs(lo_ - o.lo_) > 1e-12 || std::abs(hi_ - o.hi_) > 1e-12)
      throw InputError("ExpPoly: domain mismatch");
  }

  void canonicalize() {
    for (auto& t : terms_) {
      require_finite(t.coeff, "ExpPoly term coefficient");
      require_finite(t.mu, "ExpPoly term exponent");
      if (t.power < 0) throw InputError("ExpPoly: negative power");
      if (t.power > kMaxPower) throw InputError("ExpPoly: power exceeds growth guard");
      if (std::abs(t.mu) <= kMuMergeTol) t.mu = Complex(0.0);
    }
    std::sort(terms_.begin(), terms_.end(), [](const ExpTerm& a, const ExpTerm& b) {
      if (a.power != b.power) return a.power < b.power;
      if (a.mu.real() != b.mu.real()) return a.mu.real() < b.mu.real();
      return a.mu.imag() < b.mu.imag();
    });
    std::vector<ExpTerm> merged;
    for (const auto& t : terms_) {
      if (!merged.empty() && merged.back().power == t.power &&
          std::abs(merged.back().mu - t.mu) < kMuMergeTol) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(t);
      }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const ExpTerm& t) { return t.coeff == Complex(0.0); }),
                 merged.end());
    terms_ = std::move(merged);
  }
};

/// Sesquilinear pairing int_lo^hi f * conj(g) dw, exact.
inline Complex expoly_inner(const ExpPoly& f, const ExpPoly& g) {
  ExpPoly p = f * g.conjugated();
  return p.integral();
}

} // namespace pencil
