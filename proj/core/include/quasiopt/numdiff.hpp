#pragma once
/// @file numdiff.hpp
/// @brief Gradients, Jacobians, Hessians and directional derivatives of
/// generic callables, by central differences or nested dual numbers.
///
/// A callable passed here must accept `Vec<S>` (central scheme) and, for the
/// dual scheme, `Vec<Dual<S>>` / `Vec<Dual<Dual<S>>>`. Generic lambdas taking
/// `const auto&` satisfy both.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "quasiopt/dual.hpp"
#include "quasiopt/errors.hpp"
#include "quasiopt/linalg.hpp"

namespace quasiopt {

/// Deepest dual nesting any model is evaluated at. Models provide every
/// scalar level from double up to this depth.
inline constexpr int kMaxDualDepth = 4;

enum class DiffScheme { central, dual };

struct DiffConfig {
  DiffScheme scheme = DiffScheme::central;
  /// Central-difference step, scaled per coordinate by max(1, |x_i|).
  double step = std::cbrt(std::numeric_limits<double>::epsilon());

  /// Step used for second derivatives by the central scheme. Differencing a
  /// differenced gradient needs roughly eps^(1/4); step^(3/4) maps the
  /// default first-derivative step onto that.
  double hessian_step() const { return std::pow(step, 0.75); }
};

namespace numdiff {

namespace detail {

template <class R>
bool result_finite(const R& r) {
  if constexpr (std::is_base_of_v<Eigen::MatrixBase<R>, R>) {
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      for (Eigen::Index i = 0; i < r.rows(); ++i)
        if (!all_finite(r(i, j))) return false;
    return true;
  } else {
    return all_finite(r);
  }
}

template <class S>
[[noreturn]] void throw_non_finite(const Vec<S>& x) {
  std::vector<double> in(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) in[static_cast<std::size_t>(i)] = value_of(x(i));
  throw NonFiniteEvaluation("non-finite function value during differentiation", std::move(in));
}

template <class F, class T>
auto checked_call(F& f, const Vec<T>& x) {
  auto r = f(x);
  if (!result_finite(r)) throw_non_finite(x);
  return r;
}

template <class T>
T tangent_of(const Dual<T>& r) { return r.d; }

template <class Derived>
auto tangent_of(const Eigen::MatrixBase<Derived>& r) {
  using D = typename Derived::Scalar;
  using T = decltype(D{}.d);
  Eigen::Matrix<T, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> out(r.rows(), r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) out(i, j) = r(i, j).d;
  return out;
}

inline double scaled_step(double step, double x) { return step * std::max(1.0, std::abs(x)); }

template <class S>
constexpr bool can_nest(int levels) { return dual_depth_v<S> + levels <= kMaxDualDepth; }

[[noreturn]] inline void throw_too_deep() {
  throw DifferentiationUnavailable("dual-number nesting exceeds the supported depth");
}

}  // namespace detail

/// Gradient of a scalar function.
template <class F, class S>
Vec<S> gradient(F&& f, const Vec<S>& x, const DiffConfig& cfg) {
  const Eigen::Index n = x.size();
  Vec<S> g(n);
  if (cfg.scheme == DiffScheme::dual) {
    if constexpr (detail::can_nest<S>(1)) {
      using D = Dual<S>;
      Vec<D> xd = promote<D>(x);
      for (Eigen::Index i = 0; i < n; ++i) {
        xd(i).d = S(1);
        g(i) = detail::checked_call(f, xd).d;
        xd(i).d = S(0);
      }
      return g;
    } else {
      detail::throw_too_deep();
    }
  }
  Vec<S> xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = detail::scaled_step(cfg.step, value_of(x(i)));
    xp(i) = x(i) + h;
    const S fp = detail::checked_call(f, xp);
    xp(i) = x(i) - h;
    const S fm = detail::checked_call(f, xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Jacobian of a vector function; row i is the gradient of component i.
template <class F, class S>
Mat<S> jacobian(F&& f, const Vec<S>& x, const DiffConfig& cfg) {
  const Eigen::Index n = x.size();
  if (cfg.scheme == DiffScheme::dual) {
    if constexpr (detail::can_nest<S>(1)) {
      using D = Dual<S>;
      Vec<D> xd = promote<D>(x);
      Mat<S> jac;
      for (Eigen::Index i = 0; i < n; ++i) {
        xd(i).d = S(1);
        const Vec<D> r = detail::checked_call(f, xd);
        if (i == 0) jac.resize(r.size(), n);
        jac.col(i) = detail::tangent_of(r);
        xd(i).d = S(0);
      }
      return jac;
    } else {
      detail::throw_too_deep();
    }
  }
  Mat<S> jac;
  Vec<S> xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = detail::scaled_step(cfg.step, value_of(x(i)));
    xp(i) = x(i) + h;
    const Vec<S> fp = detail::checked_call(f, xp);
    xp(i) = x(i) - h;
    const Vec<S> fm = detail::checked_call(f, xp);
    xp(i) = x(i);
    if (i == 0) jac.resize(fp.size(), n);
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

/// Hessian of a scalar function. The result is exactly symmetric.
template <class F, class S>
Mat<S> hessian(F&& f, const Vec<S>& x, const DiffConfig& cfg) {
  const Eigen::Index n = x.size();
  Mat<S> hes(n, n);
  if (cfg.scheme == DiffScheme::dual) {
    if constexpr (detail::can_nest<S>(2)) {
      using D1 = Dual<S>;
      using D2 = Dual<D1>;
      Vec<D2> xd = promote<D2>(x);
      for (Eigen::Index i = 0; i < n; ++i) {
        xd(i).v.d = S(1);
        for (Eigen::Index j = i; j < n; ++j) {
          xd(j).d.v = S(1);
          hes(i, j) = detail::checked_call(f, xd).d.d;
          hes(j, i) = hes(i, j);
          xd(j).d.v = S(0);
        }
        xd(i).v.d = S(0);
      }
      return hes;
    } else {
      detail::throw_too_deep();
    }
  }
  // Central differences of the central gradient, then symmetrized.
  DiffConfig inner = cfg;
  inner.step = cfg.hessian_step();
  auto grad = [&](const Vec<S>& xx) { return gradient(f, xx, inner); };
  Vec<S> xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = detail::scaled_step(inner.step, value_of(x(j)));
    xp(j) = x(j) + h;
    const Vec<S> gp = grad(xp);
    xp(j) = x(j) - h;
    const Vec<S> gm = grad(xp);
    xp(j) = x(j);
    hes.col(j) = (gp - gm) / (2.0 * h);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const S avg = 0.5 * (hes(i, j) + hes(j, i));
      hes(i, j) = avg;
      hes(j, i) = avg;
    }
  return hes;
}

/// Derivative of f(x + t v) at t = 0. f may return a scalar, vector or matrix.
template <class F, class S>
auto directional(F&& f, const Vec<S>& x, const Vec<S>& v, const DiffConfig& cfg) {
  using R = std::decay_t<decltype(f(x))>;
  if (cfg.scheme == DiffScheme::dual) {
    if constexpr (detail::can_nest<S>(1)) {
      using D = Dual<S>;
      Vec<D> xd(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) xd(i) = D(x(i), v(i));
      return R(detail::tangent_of(detail::checked_call(f, xd)));
    } else {
      detail::throw_too_deep();
    }
  }
  double vmax = 0.0;
  double xmax = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    vmax = std::max(vmax, std::abs(value_of(v(i))));
    xmax = std::max(xmax, std::abs(value_of(x(i))));
  }
  const R f0 = detail::checked_call(f, x);
  if (vmax == 0.0) return R(f0 * 0.0);
  const double h = cfg.step * std::max(1.0, xmax) / vmax;
  const R fp = detail::checked_call(f, Vec<S>(x + h * v));
  const R fm = detail::checked_call(f, Vec<S>(x - h * v));
  return R((fp - fm) / (2.0 * h));
}

}  // namespace numdiff
}  // namespace quasiopt
