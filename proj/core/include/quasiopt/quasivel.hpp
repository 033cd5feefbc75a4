#pragma once
/// @file quasivel.hpp
/// @brief Quasivelocity frames, structure coefficients and the Hamel equations.
///
/// Conventions: column B of X(q) is the vector field X_B; the actuated fields
/// occupy columns 0..m-1. Structure coefficients satisfy
/// [X_A, X_B] = C^D_{AB} X_D with
/// [X_A, X_B]^C = X_A^D dX_B^C/dq^D - X_B^D dX_A^C/dq^D.
/// The Hamel residual is
///   E_A = d/dt(dl/dy^A) - (dl/dq^B) X_A^B + C^D_{AB} y^B dl/dy^D - F_B X_A^B,
/// with d/dt expanded by the chain rule, so E is affine in the accelerations:
/// E = W(q, y) ydot + b(q, y), W the y-Hessian of l.

#include <utility>
#include <vector>

#include "quasiopt/linalg.hpp"
#include "quasiopt/model.hpp"
#include "quasiopt/numdiff.hpp"

namespace quasiopt {

/// C^D_{AB} stored densely; (D, A, B) indexing.
template <class S>
class StructureCoefficients {
 public:
  StructureCoefficients() = default;
  explicit StructureCoefficients(int n) : n_(n), c_(static_cast<std::size_t>(n * n * n), S(0)) {}

  int n() const { return n_; }
  S& operator()(int d, int a, int b) { return c_[index(d, a, b)]; }
  const S& operator()(int d, int a, int b) const { return c_[index(d, a, b)]; }

 private:
  std::size_t index(int d, int a, int b) const {
    return static_cast<std::size_t>((d * n_ + a) * n_ + b);
  }
  int n_ = 0;
  std::vector<S> c_;
};

/// A point of the second-order tangent bundle in quasivelocity coordinates.
template <class S>
struct SecondOrderPoint {
  Vec<S> q;
  Vec<S> y;
  Vec<S> ydot;
};

/// Everything about the frame at one configuration.
struct FramePoint {
  Vector q;
  Matrix X;
  Matrix Xinv;
  StructureCoefficients<double> C;
  double condition = 0.0;
};

/// Affine decomposition of the Hamel residual, E = mass * ydot + bias.
template <class S>
struct HamelTerms {
  Mat<S> mass;
  Vec<S> bias;
};

/// Frames whose 2-norm condition number exceeds this are treated as singular.
inline constexpr double kSingularFrameCondition = 1e12;

namespace detail {

template <class V>
using scalar_of = typename std::decay_t<V>::Scalar;

void throw_singular_frame(double condition);

/// Cheap singularity gate for inner loops: relative pivot of the LU.
template <class S>
void check_frame_pivots(const SmallLu<S>& lu) {
  if (lu.singular() || lu.relative_min_pivot() < 1.0 / kSingularFrameCondition)
    throw_singular_frame(lu.relative_min_pivot() > 0.0 ? 1.0 / lu.relative_min_pivot()
                                                       : std::numeric_limits<double>::infinity());
}

}  // namespace detail

template <class S>
Mat<S> frame_at(const MechanicalSystem& sys, const Vec<S>& q) {
  return sys.model().template at<S>().frame(q);
}

/// qdot^A = y^B X_B^A(q).
template <class S>
Vec<S> quasi_to_velocity(const MechanicalSystem& sys, const Vec<S>& q, const Vec<S>& y) {
  return frame_at(sys, q) * y;
}

/// y = X(q)^{-1} v. Throws SingularFrame if cond(X) > 1e12.
template <class S>
Vec<S> velocity_to_quasi(const MechanicalSystem& sys, const Vec<S>& q, const Vec<S>& v) {
  const Mat<S> X = frame_at(sys, q);
  const double cond = condition_number(values_of(X));
  if (!(cond <= kSingularFrameCondition)) detail::throw_singular_frame(cond);
  return SmallLu<S>(X).solve(v);
}

/// Structure coefficients from Lie brackets of the frame columns.
template <class S>
StructureCoefficients<S> structure_coefficients(const MechanicalSystem& sys, const Vec<S>& q) {
  const int n = sys.n();
  const Mat<S> X = frame_at(sys, q);
  const SmallLu<S> lu(X);
  detail::check_frame_pivots(lu);

  auto frame_fn = [&](const auto& qq) { return frame_at(sys, qq); };
  // dX[A] = derivative of X along the vector field X_A.
  std::vector<Mat<S>> dX;
  dX.reserve(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    dX.push_back(numdiff::directional(frame_fn, q, Vec<S>(X.col(a)), sys.diff()));

  StructureCoefficients<S> C(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const Vec<S> bracket = dX[static_cast<std::size_t>(a)].col(b) - dX[static_cast<std::size_t>(b)].col(a);
      const Vec<S> c = lu.solve(bracket);
      for (int d = 0; d < n; ++d) {
        C(d, a, b) = c(d);
        C(d, b, a) = -c(d);
      }
    }
  }
  return C;
}

/// FramePoint at a double configuration (reports the condition number).
FramePoint frame_point(const MechanicalSystem& sys, const Vector& q);

/// l(q, y) = L(q, X(q) y) for velocity Lagrangians, or l itself.
template <class S>
S reduced_lagrangian(const MechanicalSystem& sys, const Vec<S>& q, const Vec<S>& y) {
  const auto& level = sys.model().template at<S>();
  if (sys.lagrangian_kind() == LagrangianKind::velocity) return level.lagrangian(q, Vec<S>(level.frame(q) * y));
  return level.lagrangian(q, y);
}

/// W and b with E(q, y, ydot) = W ydot + b.
template <class S>
HamelTerms<S> hamel_terms(const MechanicalSystem& sys, const Vec<S>& q, const Vec<S>& y) {
  const int n = sys.n();
  const DiffConfig& cfg = sys.diff();
  const Mat<S> X = frame_at(sys, q);
  const Vec<S> v = X * y;

  auto l_of_y = [&](const auto& yy) {
    using T = detail::scalar_of<decltype(yy)>;
    return reduced_lagrangian(sys, promote<T>(q), yy);
  };
  auto l_of_q = [&](const auto& qq) {
    using T = detail::scalar_of<decltype(qq)>;
    return reduced_lagrangian(sys, qq, promote<T>(y));
  };
  // q -> dl/dy at fixed y; its derivative along Xy is the mixed chain-rule term.
  auto momentum_of_q = [&](const auto& qq) {
    using T = detail::scalar_of<decltype(qq)>;
    const Vec<T> yy = promote<T>(y);
    return numdiff::gradient(
        [&](const auto& y2) {
          using U = detail::scalar_of<decltype(y2)>;
          return reduced_lagrangian(sys, promote<U>(qq), y2);
        },
        yy, cfg);
  };

  HamelTerms<S> out;
  out.mass = numdiff::hessian(l_of_y, y, cfg);
  const Vec<S> dl_dy = numdiff::gradient(l_of_y, y, cfg);
  const Vec<S> dl_dq = numdiff::gradient(l_of_q, q, cfg);
  const Vec<S> mixed = numdiff::directional(momentum_of_q, q, v, cfg);
  const StructureCoefficients<S> C = structure_coefficients(sys, q);

  out.bias = mixed - X.transpose() * dl_dq;
  for (int a = 0; a < n; ++a) {
    S acc = S(0);
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) acc = acc + C(d, a, b) * y(b) * dl_dy(d);
    out.bias(a) = out.bias(a) + acc;
  }
  if (sys.has_force()) {
    const Vec<S> F = sys.model().template at<S>().force(q, v);
    out.bias = out.bias - X.transpose() * F;
  }
  return out;
}

/// Hamel residual E_A at a point of T^(2)Q.
template <class S>
Vec<S> hamel_residual(const MechanicalSystem& sys, const SecondOrderPoint<S>& pt) {
  const HamelTerms<S> t = hamel_terms(sys, pt.q, pt.y);
  return t.mass * pt.ydot + t.bias;
}

struct QuasiRates {
  Vector qdot;
  Vector ydot;
};

/// Unforced-by-control Hamel flow: qdot = X y, ydot solving E = 0.
/// Throws SingularMassMatrix if the y-Hessian of l is singular.
QuasiRates free_dynamics(const MechanicalSystem& sys, const Vector& q, const Vector& y);

/// Controlled Hamel flow with E_a = u_a on the actuated rows and E_alpha = 0.
QuasiRates forced_dynamics(const MechanicalSystem& sys, const Vector& q, const Vector& y,
                           const Vector& u);

}  // namespace quasiopt
