#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pencil/core.hpp"

namespace pencil {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// sigma_max / sigma_min; infinity mapped to a large sentinel.
inline double cond_number(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  double smin = s(s.size() - 1);
  if (smin <= 0.0) return 1e300;
  return s(0) / smin;
}

/// Orthonormal basis of the numerical kernel: right singular vectors whose
/// singular values fall below rtol * sigma_max.
inline std::vector<Vector> kernel_vectors(const Matrix& A, double rtol = 1e-8) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  std::vector<Vector> out;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) <= rtol * std::max(smax, 1e-300)) out.push_back(svd.matrixV().col(i));
  if (smax == 0.0) {
    out.clear();
    for (int i = 0; i < A.cols(); ++i) out.push_back(Matrix::Identity(A.cols(), A.cols()).col(i));
  }
  return out;
}

/// Minimum-norm least-squares solution.
inline Vector lstsq_min_norm(const Matrix& A, const Vector& b, double rtol = 1e-12) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rtol);
  return svd.solve(b);
}

inline double smallest_singular_value(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

inline double largest_singular_value(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

} // namespace pencil
