#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>

#include "pencil/errors.hpp"

namespace pencil {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require_finite(const Complex& z, const char* where) {
  if (!is_finite(z)) throw InputError(std::string("non-finite value in ") + where);
}

inline void require_finite(double x, const char* where) {
  if (!std::isfinite(x)) throw InputError(std::string("non-finite value in ") + where);
}

inline double abs2(const Complex& z) { return std::norm(z); }

/// r^{i*lambda} = exp(i*lambda*ln r), the Mellin power.  Requires r > 0.
inline Complex power_ri(double r, const Complex& lambda) {
  if (!(r > 0.0)) throw DomainError("power_ri: radius must be positive");
  return std::exp(kI * lambda * std::log(r));
}

/// beta^{i*lambda - m} for a dilation coefficient beta > 0.
inline Complex dilation_factor(double beta, const Complex& lambda, int order) {
  if (!(beta > 0.0)) throw DomainError("dilation_factor: beta must be positive");
  return std::exp((kI * lambda - static_cast<double>(order)) * std::log(beta));
}

/// Round-trip safe decimal formatting (17 significant digits).
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double relative_gap(const Complex& a, const Complex& b) {
  double s = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / s;
}

} // namespace pencil
