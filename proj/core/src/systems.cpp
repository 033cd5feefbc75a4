#include "quasiopt/systems.hpp"

#include <cmath>

namespace quasiopt {

namespace {

void check_cost(const CostSpec& cost) {
  if (!std::isfinite(cost.value)) throw InvalidArgument("constant cost must be finite");
}

struct PlanarRigidBody {
  PlanarRigidBodyParams p;
  RigidBodyOptions opt;

  template <class S>
  Mat<S> frame(const Vec<S>& q) const {
    using std::cos;
    using std::sin;
    const S c = cos(q(2));
    const S s = sin(q(2));
    const double m = p.mass, J = p.inertia, h = p.offset;
    Mat<S> X(3, 3);
    X(0, 0) = c / m;
    X(1, 0) = s / m;
    X(2, 0) = S(0.0);
    X(0, 1) = -s / m;
    X(1, 1) = c / m;
    X(2, 1) = S(-h / J);
    X(0, 2) = h * s;
    X(1, 2) = -h * c;
    X(2, 2) = S(-1.0);
    if (opt.frame_defect) X.col(2) *= s;
    return X;
  }

  template <class S>
  S lagrangian(const Vec<S>&, const Vec<S>& v) const {
    return 0.5 * (p.mass * (v(0) * v(0) + v(1) * v(1)) + p.inertia * v(2) * v(2));
  }

  template <class S>
  S cost(const Vec<S>&, const Vec<S>&, const Vec<S>& u) const {
    if (opt.cost.kind == CostSpec::Kind::constant) return S(opt.cost.value);
    return 0.5 * u.dot(u);
  }
};

struct FreeLagrangian {
  template <class S>
  S operator()(const Vec<S>&, const Vec<S>& v) const {
    return 0.5 * v.dot(v);
  }
};

}  // namespace

MechanicalSystem planar_rigid_body(const PlanarRigidBodyParams& params, const RigidBodyOptions& options) {
  if (!(params.mass > 0.0 && params.inertia > 0.0))
    throw InvalidArgument("rigid body needs positive mass and inertia");
  if (!std::isfinite(params.offset)) throw InvalidArgument("force offset must be finite");
  check_cost(options.cost);
  MechanicalSystem sys =
      make_system(PlanarRigidBody{params, options}, 3, 2, LagrangianKind::velocity, "planar-rigid-body");
  sys.set_periodic({false, false, true});
  return sys;
}

MechanicalSystem point_mass_lq(const CostSpec& cost) {
  check_cost(cost);
  return coordinate_wrap(FreeLagrangian{}, 2, 1, cost, "point-mass-lq");
}

}  // namespace quasiopt
