#pragma once

#include <Eigen/Core>

#include <algorithm>

#include "reaper/errors.hpp"

namespace reaper {

/// Tridiagonal matrix plus the two corner entries a three-point one-sided
/// wall row introduces: (0, 2) and (n-1, n-3).
///
/// Row i reads  lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]
/// (lower[0] and upper[n-1] unused).
template <typename Scalar>
struct BorderedTridiagonal {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector lower, diag, upper;
  Scalar corner_first{0};  // entry (0, 2)
  Scalar corner_last{0};   // entry (n-1, n-3)

  explicit BorderedTridiagonal(Eigen::Index n = 0)
      : lower(Vector::Zero(n)), diag(Vector::Zero(n)), upper(Vector::Zero(n)) {}

  Eigen::Index size() const { return diag.size(); }

  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index n = size();
    if (j == i) return diag[i];
    if (j == i - 1) return lower[i];
    if (j == i + 1) return upper[i];
    if (i == 0 && j == 2) return corner_first;
    if (i == n - 1 && j == n - 3) return corner_last;
    return Scalar(0);
  }

  Vector multiply(const Vector& x) const {
    const Eigen::Index n = size();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar acc = diag[i] * x[i];
      if (i > 0) acc += lower[i] * x[i - 1];
      if (i + 1 < n) acc += upper[i] * x[i + 1];
      y[i] = acc;
    }
    y[0] += corner_first * x[2];
    y[n - 1] += corner_last * x[n - 3];
    return y;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
    const Eigen::Index n = size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2); j <= std::min(n - 1, i + 2); ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  /// Folds the corners into rows 0 and n-1 using rows 1 and n-2, then runs
  /// the Thomas sweep. No pivoting; the Newton systems here are diagonally
  /// dominant in the interior.
  Vector solve(Vector rhs) const {
    const Eigen::Index n = size();
    if (n < 4 || rhs.size() != n) throw ContractViolation("BorderedTridiagonal::solve: bad dimensions");
    Vector a = lower, b = diag, c = upper;

    if (corner_first != Scalar(0)) {
      const Scalar f = corner_first / c[1];
      b[0] -= f * a[1];
      c[0] -= f * b[1];
      rhs[0] -= f * rhs[1];
    }
    if (corner_last != Scalar(0)) {
      const Scalar f = corner_last / a[n - 2];
      b[n - 1] -= f * c[n - 2];
      a[n - 1] -= f * b[n - 2];
      rhs[n - 1] -= f * rhs[n - 2];
    }

    for (Eigen::Index i = 1; i < n; ++i) {
      const Scalar m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    Vector x(n);
    x[n - 1] = rhs[n - 1] / b[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = (rhs[i] - c[i] * x[i + 1]) / b[i];
    return x;
  }
};

}  // namespace reaper
