#pragma once
/// @file linalg.hpp
/// @brief Vector/matrix aliases and a small LU factorization that works for any
/// scalar in the dual tower (pivoting is decided on primal values).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "quasiopt/dual.hpp"

namespace quasiopt {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Vec<double>;
using Matrix = Mat<double>;

/// Primal part of a vector or matrix of (possibly dual) scalars.
template <class Derived>
Matrix values_of(const Eigen::MatrixBase<Derived>& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = value_of(a(i, j));
  return out;
}

/// Embeds a vector into a deeper scalar type with zero derivative parts.
template <class T, class S>
Vec<T> promote(const Vec<S>& x) {
  if constexpr (std::is_same_v<T, S>) {
    return x;
  } else {
    Vec<T> out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = T(x(i));
    return out;
  }
}

template <class T, class S>
T promote_scalar(const S& x) {
  if constexpr (std::is_same_v<T, S>) return x;
  else return T(x);
}

/// LU factorization with partial pivoting, PA = LU, for generic scalars.
template <class S>
class SmallLu {
 public:
  explicit SmallLu(Mat<S> a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const Eigen::Index n = lu_.rows();
    for (Eigen::Index i = 0; i < n; ++i) perm_[i] = i;
    double scale = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(value_of(lu_(i, j))));
    scale_ = scale;
    min_pivot_ = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index p = k;
      double best = std::abs(value_of(lu_(k, k)));
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const double c = std::abs(value_of(lu_(i, k)));
        if (c > best) { best = c; p = i; }
      }
      min_pivot_ = std::min(min_pivot_, best);
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_[k], perm_[p]);
        sign_ = -sign_;
      }
      if (best == 0.0) { singular_ = true; continue; }
      for (Eigen::Index i = k + 1; i < n; ++i) {
        lu_(i, k) = lu_(i, k) / lu_(k, k);
        const S f = lu_(i, k);
        for (Eigen::Index j = k + 1; j < n; ++j) lu_(i, j) = lu_(i, j) - f * lu_(k, j);
      }
    }
  }

  bool singular() const { return singular_; }
  /// Smallest pivot magnitude relative to the largest input entry.
  double relative_min_pivot() const { return scale_ > 0.0 ? min_pivot_ / scale_ : 0.0; }

  S determinant() const {
    S det = S(sign_);
    for (Eigen::Index i = 0; i < lu_.rows(); ++i) det = det * lu_(i, i);
    return det;
  }

  Vec<S> solve(const Vec<S>& b) const {
    const Eigen::Index n = lu_.rows();
    Vec<S> x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = b(perm_[i]);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j) x(i) = x(i) - lu_(i, j) * x(j);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      for (Eigen::Index j = i + 1; j < n; ++j) x(i) = x(i) - lu_(i, j) * x(j);
      x(i) = x(i) / lu_(i, i);
    }
    return x;
  }

  Mat<S> solve(const Mat<S>& b) const {
    Mat<S> x(b.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vec<S>(b.col(j)));
    return x;
  }

  Mat<S> inverse() const {
    const Eigen::Index n = lu_.rows();
    Mat<S> eye = Mat<S>::Identity(n, n);
    return solve(eye);
  }

 private:
  Mat<S> lu_;
  std::vector<Eigen::Index> perm_;
  int sign_ = 1;
  bool singular_ = false;
  double scale_ = 0.0;
  double min_pivot_ = 0.0;
};

/// 2-norm condition number of a double matrix (infinite when singular).
double condition_number(const Matrix& a);

/// max |a_ij|.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(value_of(a(i, j))));
  return m;
}

}  // namespace quasiopt
