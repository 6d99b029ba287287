#pragma once

#include <vector>

#include "pencil/exp_poly.hpp"

namespace pencil {

/// Piecewise exponential polynomial on contiguous intervals; the adjoint
/// densities live here (their derivatives jump at nonlocal evaluation
/// angles).
class PiecewiseExpPoly {
public:
  struct Piece {
    double lo, hi;
    ExpPoly f;
  };

  PiecewiseExpPoly() = default;
  explicit PiecewiseExpPoly(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw InputError("PiecewiseExpPoly: no pieces");
    for (size_t i = 0; i < pieces_.size(); ++i) {
      if (!(pieces_[i].lo < pieces_[i].hi)) throw InputError("PiecewiseExpPoly: bad piece");
      if (i > 0 && std::abs(pieces_[i].lo - pieces_[i - 1].hi) > 1e-12)
        throw InputError("PiecewiseExpPoly: pieces not contiguous");
    }
  }

  static PiecewiseExpPoly single(const ExpPoly& f) {
    return PiecewiseExpPoly({Piece{f.lo(), f.hi(), f}});
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  double lo() const { return pieces_.front().lo; }
  double hi() const { return pieces_.back().hi; }
  bool empty_pieces() const { return pieces_.empty(); }

  Complex eval(double w) const {
    const Piece& p = locate(w);
    return p.f.eval_unchecked(w);
  }

  /// One-sided values around interior breakpoints.
  Complex eval_left(double w) const { return locate(w, true).f.eval_unchecked(w); }
  Complex eval_right(double w) const { return locate(w, false).f.eval_unchecked(w); }

  PiecewiseExpPoly derivative() const {
    std::vector<Piece> out;
    for (const Piece& p : pieces_) out.push_back(Piece{p.lo, p.hi, p.f.derivative()});
    return PiecewiseExpPoly(std::move(out));
  }

  PiecewiseExpPoly conjugated() const {
    std::vector<Piece> out;
    for (const Piece& p : pieces_) out.push_back(Piece{p.lo, p.hi, p.f.conjugated()});
    return PiecewiseExpPoly(std::move(out));
  }

  PiecewiseExpPoly operator*(const Complex& c) const {
    std::vector<Piece> out;
    for (const Piece& p : pieces_) out.push_back(Piece{p.lo, p.hi, p.f * c});
    return PiecewiseExpPoly(std::move(out));
  }

  PiecewiseExpPoly operator+(const PiecewiseExpPoly& o) const {
    // merge breakpoint lattices
    std::vector<double> cuts;
    for (const Piece& p : pieces_) {
      cuts.push_back(p.lo);
      cuts.push_back(p.hi);
    }
    for (const Piece& p : o.pieces_) {
      cuts.push_back(p.lo);
      cuts.push_back(p.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               cuts.end());
    std::vector<Piece> out;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      double lo = cuts[i], hi = cuts[i + 1];
      double mid = 0.5 * (lo + hi);
      ExpPoly f = locate(mid).f.with_domain(lo, hi) + o.locate(mid).f.with_domain(lo, hi);
      out.push_back(Piece{lo, hi, f});
    }
    return PiecewiseExpPoly(std::move(out));
  }

  /// Exact integral of (this) * conj(g) over the common domain.
  Complex inner_with(const ExpPoly& g) const {
    Complex s(0.0);
    for (const Piece& p : pieces_) {
      ExpPoly prod = p.f.with_domain(p.lo, p.hi) * g.conjugated().with_domain(p.lo, p.hi);
      s += prod.integral(p.lo, p.hi);
    }
    return s;
  }

  /// Exact integral of f * conj(this) over the common domain.
  Complex inner_against(const ExpPoly& f) const {
    Complex s(0.0);
    for (const Piece& p : pieces_) {
      ExpPoly prod = f.with_domain(p.lo, p.hi) * p.f.conjugated().with_domain(p.lo, p.hi);
      s += prod.integral(p.lo, p.hi);
    }
    return s;
  }

  double sup_sample(int n = 96) const {
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = lo() + (hi() - lo()) * i / n;
      m = std::max(m, std::abs(eval(w)));
    }
    return m;
  }

  std::vector<double> interior_breakpoints() const {
    std::vector<double> out;
    for (size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
    return out;
  }

private:
  std::vector<Piece> pieces_;

  const Piece& locate(double w, bool prefer_left = false) const {
    for (size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      bool last = (i + 1 == pieces_.size());
      if (w < p.lo - 1e-9) break;
      if (w <= p.hi + (last ? 1e-9 : 0.0)) {
        if (!last && !prefer_left && std::abs(w - p.hi) < 1e-14) return pieces_[i + 1];
        return p;
      }
    }
    throw DomainError("PiecewiseExpPoly: point outside domain");
  }
};

} // namespace pencil
