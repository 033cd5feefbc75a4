#pragma once
/// @file systems.hpp
/// @brief Built-in mechanical systems.

#include <string>

#include "quasiopt/model.hpp"

namespace quasiopt {

struct PlanarRigidBodyParams {
  double mass = 1.0;     ///< m [kg]
  double inertia = 1.0;  ///< J [kg m^2]
  double offset = 1.0;   ///< h [m], distance of the force point from the center of mass
};

/// Running cost of the built-in systems.
struct CostSpec {
  enum class Kind { quadratic, constant } kind = Kind::quadratic;
  double value = 1.0;  ///< C for the constant kind
};

struct RigidBodyOptions {
  CostSpec cost;
  /// Scales X_3 by sin(theta), making the frame singular at theta = 0.
  /// Only useful for exercising the SingularFrame paths.
  bool frame_defect = false;
};

/// Planar rigid body on R^2 x S^1, q = (x, y, theta), L = 1/2 qdot^T diag(m, m, J) qdot,
/// control fields X_1, X_2 and completion X_3, no external force, C = 1/2 |u|^2.
MechanicalSystem planar_rigid_body(const PlanarRigidBodyParams& params = {},
                                   const RigidBodyOptions& options = {});

/// Identity frame on R^2, L = 1/2 |v|^2, one control on the first coordinate.
MechanicalSystem point_mass_lq(const CostSpec& cost = {});

namespace detail {

template <class Lag>
struct CoordinateWrapped {
  Lag lag;
  int n;
  CostSpec cost_spec;

  template <class S>
  Mat<S> frame(const Vec<S>& q) const { return Mat<S>::Identity(q.size(), q.size()); }
  template <class S>
  S lagrangian(const Vec<S>& q, const Vec<S>& v) const { return lag(q, v); }
  template <class S>
  S cost_value(const Vec<S>& u) const {
    if (cost_spec.kind == CostSpec::Kind::constant) return S(cost_spec.value);
    return 0.5 * u.dot(u);
  }
  template <class S>
  S cost(const Vec<S>&, const Vec<S>&, const Vec<S>& u) const { return cost_value(u); }
};

}  // namespace detail

/// Identity-frame system around a velocity Lagrangian `lag(q, v)` (a generic
/// callable templated on the scalar), so quasivelocities are velocities and the
/// Hamel equations reduce to Euler-Lagrange. Cost 1/2 |u|^2 unless overridden.
template <class Lag>
MechanicalSystem coordinate_wrap(Lag lag, int n, int m, const CostSpec& cost = {},
                                 std::string name = "coordinate-wrap") {
  return make_system(detail::CoordinateWrapped<Lag>{std::move(lag), n, cost}, n, m,
                     LagrangianKind::velocity, std::move(name));
}

}  // namespace quasiopt
