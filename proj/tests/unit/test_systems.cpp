#include <gtest/gtest.h>

#include "quasiopt/reduction.hpp"
#include "test_support.hpp"

using namespace quasiopt;

TEST(Systems, RigidBodyShape) {
  const MechanicalSystem sys = planar_rigid_body();
  EXPECT_EQ(sys.n(), 3);
  EXPECT_EQ(sys.m(), 2);
  EXPECT_EQ(sys.unactuated(), 1);
  EXPECT_TRUE(sys.model().generic());
  EXPECT_EQ(sys.diff().scheme, DiffScheme::dual);
  EXPECT_EQ(sys.periodic(), (std::vector<bool>{false, false, true}));
}

TEST(Systems, RigidBodyReducedLagrangian) {
  // l = 1/2 [ (y1)^2/m + (m h^2 + J)/(m J) (y2)^2 + (m h^2 + J) (y3)^2 ].
  qtest::Gen gen(61);
  for (int t = 0; t < 20; ++t) {
    const PlanarRigidBodyParams p = gen.rigid_params();
    const double m = p.mass, J = p.inertia, h = p.offset;
    const MechanicalSystem sys = planar_rigid_body(p);
    const Vector q = gen.vec(3), y = gen.vec(3);
    const double ref = 0.5 * (y(0) * y(0) / m + (m * h * h + J) / (m * J) * y(1) * y(1) + (m * h * h + J) * y(2) * y(2));
    EXPECT_NEAR(reduced_lagrangian(sys, q, y), ref, 1e-12);
  }
}

TEST(Systems, InvalidParametersRejected) {
  EXPECT_THROW((void)planar_rigid_body({0.0, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW((void)planar_rigid_body({1.0, -1.0, 1.0}), InvalidArgument);
  EXPECT_THROW((void)make_callback_system(CallbackFunctions{}, 3, 2, LagrangianKind::velocity), InvalidArgument);
}

TEST(Systems, DimensionsValidated) {
  auto lag = [](const auto&, const auto& v) { return 0.5 * v.dot(v); };
  EXPECT_THROW((void)coordinate_wrap(lag, 2, 2), InvalidArgument);
  EXPECT_THROW((void)coordinate_wrap(lag, 2, 0), InvalidArgument);
}

TEST(Systems, PointMassIsFlat) {
  const ReducedProblem rp(point_mass_lq());
  const Vector z = Vector::Zero(2);
  Vector y(2);
  y << 0.3, -0.7;
  const MPoint<double> mp = evaluate_on_m(rp, z, y, Vector(Vector::Constant(1, 2.0)));
  EXPECT_EQ(mp.G(0), 0.0);
  EXPECT_DOUBLE_EQ(mp.u(0), 2.0);
  EXPECT_DOUBLE_EQ(mp.ltilde, 2.0);
}

TEST(Systems, ConstantCostOption) {
  CostSpec c;
  c.kind = CostSpec::Kind::constant;
  c.value = 3.5;
  const ReducedProblem rp(point_mass_lq(c));
  const Vector z = Vector::Zero(2);
  EXPECT_DOUBLE_EQ(tilde_L(rp, z, z, Vector(Vector::Ones(1))), 3.5);
}
