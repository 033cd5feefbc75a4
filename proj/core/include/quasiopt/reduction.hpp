#pragma once
/// @file reduction.hpp
/// @brief The optimal control problem as a constrained second-order variational
/// problem: constraints Phi^alpha (unactuated Hamel residuals), their solution
/// ydot^alpha = G^alpha(q, y, ydot^a), control recovery u_a = E_a, and the
/// cost L~_M(q, y, ydot^a) = C(q, y, u) on the constraint submanifold M.

#include <cmath>
#include <string>

#include "quasiopt/errors.hpp"
#include "quasiopt/linalg.hpp"
#include "quasiopt/model.hpp"
#include "quasiopt/quasivel.hpp"

namespace quasiopt {

/// How G is obtained from the constraints.
enum class ConstraintSolve {
  linear,  ///< exact solve using the affine structure of Phi in ydot
  newton   ///< Newton iteration on Phi(ydot^alpha) = 0 (nonstandard Lagrangians)
};

struct ReducedProblem {
  explicit ReducedProblem(MechanicalSystem system) : sys(std::move(system)) {}

  MechanicalSystem sys;
  /// |det W_alpha_beta| <= tol * max|W_alpha_beta|^(n-m) counts as singular.
  double hessian_block_tolerance = 1e-10;
  ConstraintSolve solver = ConstraintSolve::linear;
  int newton_max_iterations = 50;
  double newton_tolerance = 1e-13;
};

/// Quantities on M at (q, y, ydot^a).
template <class S>
struct MPoint {
  Vec<S> G;     ///< ydot^alpha
  Vec<S> u;     ///< recovered controls
  S ltilde{};   ///< C(q, y, u)
};

/// Phi^alpha(pt): unactuated rows of the Hamel residual.
template <class S>
Vec<S> constraint_values(const ReducedProblem& rp, const SecondOrderPoint<S>& pt) {
  return hamel_residual(rp.sys, pt).tail(rp.sys.unactuated());
}

/// u_a(pt): actuated rows of the Hamel residual.
template <class S>
Vec<S> recover_controls(const ReducedProblem& rp, const SecondOrderPoint<S>& pt) {
  return hamel_residual(rp.sys, pt).head(rp.sys.m());
}

namespace detail {

template <class S>
Vec<S> solve_constraints_linear(const ReducedProblem& rp, const HamelTerms<S>& t, const Vec<S>& ydot_a) {
  const int m = rp.sys.m();
  const int k = rp.sys.unactuated();
  const Mat<S> block = t.mass.bottomRightCorner(k, k);
  const SmallLu<S> lu(block);
  const double det = std::abs(value_of(lu.determinant()));
  const double scale = max_abs(block);
  if (lu.singular() || !(det > rp.hessian_block_tolerance * std::pow(scale, k)))
    throw SingularHessianBlock("unactuated block of the y-Hessian of l is singular (|det| = " +
                               std::to_string(det) + ")");
  const Vec<S> rhs = -(t.bias.tail(k) + t.mass.bottomLeftCorner(k, m) * ydot_a);
  return lu.solve(rhs);
}

template <class S>
Vec<S> solve_constraints_newton(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y,
                                const Vec<S>& ydot_a, Vec<S> guess) {
  const int m = rp.sys.m();
  const int k = rp.sys.unactuated();
  auto phi = [&](const auto& qq, const auto& yy, const auto& ya, const auto& g) {
    using T = scalar_of<decltype(g)>;
    SecondOrderPoint<T> pt{qq, yy, Vec<T>(rp.sys.n())};
    pt.ydot.head(m) = ya;
    pt.ydot.tail(k) = g;
    return Vec<T>(hamel_residual(rp.sys, pt).tail(k));
  };
  // The Jacobian is taken on primal values only; with an exact primal Jacobian
  // the iteration also converges the derivative parts of dual scalars.
  const Vector q0 = values_of(q), y0 = values_of(y), ya0 = values_of(ydot_a);
  auto phi0 = [&](const auto& g) {
    using T = scalar_of<decltype(g)>;
    return phi(promote<T>(q0), promote<T>(y0), promote<T>(ya0), g);
  };
  for (int it = 0; it < rp.newton_max_iterations; ++it) {
    const Vec<S> r = phi(q, y, ydot_a, guess);
    if (max_abs(r) <= rp.newton_tolerance) return guess;
    DiffConfig central = rp.sys.diff();
    central.scheme = DiffScheme::central;
    const Matrix J = numdiff::jacobian(phi0, Vector(values_of(guess)), central);
    const SmallLu<double> lu(J);
    const double det = std::abs(lu.determinant());
    if (lu.singular() || !(det > rp.hessian_block_tolerance * std::pow(max_abs(J), k)))
      throw SingularHessianBlock("constraint Jacobian singular during Newton solve");
    const Matrix Jinv = lu.inverse();
    guess = guess - Jinv.cast<S>() * r;
  }
  return guess;
}

}  // namespace detail

/// G^alpha(q, y, ydot^a) such that Phi vanishes at (q, y, (ydot^a, G)).
template <class S>
Vec<S> solve_constraints(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y, const Vec<S>& ydot_a) {
  const HamelTerms<S> t = hamel_terms(rp.sys, q, y);
  const Vec<S> G = detail::solve_constraints_linear(rp, t, ydot_a);
  if (rp.solver == ConstraintSolve::linear) return G;
  return detail::solve_constraints_newton(rp, q, y, ydot_a, G);
}

/// G, u and L~_M at a point of M, sharing one Hamel evaluation.
template <class S>
MPoint<S> evaluate_on_m(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y, const Vec<S>& ydot_a) {
  const int m = rp.sys.m();
  const HamelTerms<S> t = hamel_terms(rp.sys, q, y);
  MPoint<S> out;
  out.G = detail::solve_constraints_linear(rp, t, ydot_a);
  if (rp.solver == ConstraintSolve::newton) out.G = detail::solve_constraints_newton(rp, q, y, ydot_a, out.G);
  Vec<S> ydot(rp.sys.n());
  ydot.head(m) = ydot_a;
  ydot.tail(rp.sys.unactuated()) = out.G;
  out.u = (t.mass * ydot + t.bias).head(m);
  out.ltilde = rp.sys.model().template at<S>().cost(q, y, out.u);
  return out;
}

/// L~_M(q, y, ydot^a).
template <class S>
S tilde_L(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y, const Vec<S>& ydot_a) {
  return evaluate_on_m(rp, q, y, ydot_a).ltilde;
}

/// Largest second difference of Phi in ydot at a point (zero for affine Phi).
double affinity_defect(const ReducedProblem& rp, const Vector& q, const Vector& y, const Vector& ydot,
                       const Vector& direction, double step = 1e-2);

}  // namespace quasiopt
