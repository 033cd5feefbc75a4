#pragma once
/// @file skinner_rusk.hpp
/// @brief The presymplectic system on W0 = M x_TQ T*TQ, its primary constraints,
/// the constraint submanifold W1 and the unique vector field on W1.
///
/// W0 coordinates are ordered (q, y, ydot^a, p, ptilde) with ptilde of length n.
/// W1 coordinates are (q, y, ydot^a, p, ptilde_alpha); ptilde_a is never stored
/// and is recovered from the primary constraint
///   ptilde_a = dL~_M/dydot^a - ptilde_alpha dG^alpha/dydot^a.

#include <vector>

#include "quasiopt/errors.hpp"
#include "quasiopt/linalg.hpp"
#include "quasiopt/numdiff.hpp"
#include "quasiopt/quasivel.hpp"
#include "quasiopt/reduction.hpp"

namespace quasiopt {

template <class S>
struct W0State {
  Vec<S> q;
  Vec<S> y;
  Vec<S> ydot_a;
  Vec<S> p;
  Vec<S> ptilde;
};

template <class S>
struct W1State {
  Vec<S> q;
  Vec<S> y;
  Vec<S> ydot_a;
  Vec<S> p;
  Vec<S> ptilde_alpha;
};

struct RegularityReport {
  Matrix R;
  double det = 0.0;
  double condition = 0.0;
  bool symplectic = false;
};

/// Time derivative of a W1 state plus the rate of the recovered ptilde_a
/// (the latter only feeds the constraint-drift monitor).
struct W1Field {
  W1State<double> rate;
  Vector ptilde_a_rate;
};

/// Flat layouts, in the coordinate order documented above.
Vector to_vector(const W0State<double>& w);
Vector to_vector(const W1State<double>& w);
W0State<double> w0_from_vector(const Vector& v, int n, int m);
W1State<double> w1_from_vector(const Vector& v, int n, int m);
inline int w0_dimension(int n, int m) { return 4 * n + m; }
inline int w1_dimension(int n) { return 4 * n; }

/// Relative tolerance of the regularity gate: |det R| > tol * max|R_ab|^m.
inline constexpr double kRegularityTolerance = 1e-10;

/// H~ = p.(X y) + ptilde_a ydot^a + ptilde_alpha G^alpha - L~_M.
template <class S>
S hamiltonian(const ReducedProblem& rp, const W0State<S>& w) {
  const int m = rp.sys.m();
  const int k = rp.sys.unactuated();
  const MPoint<S> mp = evaluate_on_m(rp, w.q, w.y, w.ydot_a);
  const Vec<S> v = frame_at(rp.sys, w.q) * w.y;
  return w.p.dot(v) + w.ptilde.head(m).dot(w.ydot_a) + w.ptilde.tail(k).dot(mp.G) - mp.ltilde;
}

/// K = L~_M - ptilde_alpha G^alpha. Its ydot^a-gradient is the ptilde_a fixed by
/// the primary constraints and its ydot^a-Hessian is the regularity matrix R.
template <class S>
S constraint_potential(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y, const Vec<S>& ydot_a,
                       const Vec<S>& ptilde_alpha) {
  const MPoint<S> mp = evaluate_on_m(rp, q, y, ydot_a);
  return mp.ltilde - ptilde_alpha.dot(mp.G);
}

/// dK/dydot^a.
template <class S>
Vec<S> constraint_momentum(const ReducedProblem& rp, const Vec<S>& q, const Vec<S>& y, const Vec<S>& ydot_a,
                           const Vec<S>& ptilde_alpha) {
  auto k_of_ya = [&](const auto& ya) {
    using T = detail::scalar_of<decltype(ya)>;
    return constraint_potential(rp, promote<T>(q), promote<T>(y), ya, promote<T>(ptilde_alpha));
  };
  return numdiff::gradient(k_of_ya, ydot_a, rp.sys.diff());
}

/// phi_a = dH~/dydot^a = ptilde_a + ptilde_alpha dG^alpha/dydot^a - dL~_M/dydot^a.
template <class S>
Vec<S> primary_constraints(const ReducedProblem& rp, const W0State<S>& w) {
  const int m = rp.sys.m();
  const int k = rp.sys.unactuated();
  return w.ptilde.head(m) - constraint_momentum(rp, w.q, w.y, w.ydot_a, Vec<S>(w.ptilde.tail(k)));
}

/// The unique W0 state over a W1 state, i.e. with phi_a = 0.
template <class S>
W0State<S> lift_to_w1(const ReducedProblem& rp, const W1State<S>& w) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  W0State<S> out{w.q, w.y, w.ydot_a, w.p, Vec<S>(n)};
  out.ptilde.head(m) = constraint_momentum(rp, w.q, w.y, w.ydot_a, w.ptilde_alpha);
  out.ptilde.tail(n - m) = w.ptilde_alpha;
  return out;
}

/// Constant matrix of Omega = dq^A ^ dp_A + dy^A ^ dptilde_A in W0 coordinates.
Matrix presymplectic_form(int n, int m);

/// R_ab, det R, condition and the symplectic verdict at a W1 state.
RegularityReport regularity(const ReducedProblem& rp, const W1State<double>& w);

/// The vector field on W1 solving i_X Omega = dH~. Throws RegularityFailure
/// when R is singular.
W1Field w1_vector_field(const ReducedProblem& rp, const W1State<double>& w);

/// Columns span T W1 inside T W0: the differential of lift_to_w1.
Matrix lift_differential(const ReducedProblem& rp, const W1State<double>& w);

/// The field lifted to W0: (dq, dy, d ydot^a, dp, dptilde) with dptilde_a the
/// derivative of the lifted ptilde_a along the W1 field.
Vector lifted_field(const ReducedProblem& rp, const W1State<double>& w);

/// Max over the given W1 tangent directions V (columns, 4n rows) of
/// |Omega(X, dlift V) - dH~(dlift V)|. With no directions, the coordinate basis
/// of W1 is used.
double presymplectic_residual(const ReducedProblem& rp, const W1State<double>& w,
                              const Matrix& directions = Matrix());

}  // namespace quasiopt
