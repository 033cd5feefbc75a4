#include <gtest/gtest.h>

#include <cmath>

#include "quasiopt/reduction.hpp"
#include "test_support.hpp"

using namespace quasiopt;

namespace {

SecondOrderPoint<double> on_m(const ReducedProblem& rp, const Vector& q, const Vector& y, const Vector& ya) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  Vector ydot(n);
  ydot << ya, solve_constraints(rp, q, y, ya);
  (void)m;
  return {q, y, ydot};
}

// The displayed controlled equations of the planar rigid body, "--" read as "-".
Vector displayed_equations(const PlanarRigidBodyParams& p, const Vector& y, const Vector& ydot) {
  const double m = p.mass, J = p.inertia, h = p.offset;
  Vector e(3);
  e(0) = ydot(0) + h / J * y(1) * y(1) - h * m * y(2) * y(2) + (J - m * h * h) / J * y(1) * y(2);
  e(1) = (J + m * h * h) / J * ydot(1) - h / J * y(0) * y(1) - y(0) * y(2);
  e(2) = (J + m * h * h) * ydot(2) + h * h / J * y(0) * y(1) + h * y(0) * y(2);
  return e;
}

}  // namespace

TEST(Reduction, ClosureOnConstraintManifold) {
  qtest::Gen gen(31);
  for (int t = 0; t < 30; ++t) {
    const ReducedProblem rp(planar_rigid_body(gen.rigid_params()));
    const auto pt = on_m(rp, gen.vec(3), gen.vec(3), gen.vec(2));
    EXPECT_LE(constraint_values(rp, pt).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reduction, RigidBodyConstraintAndAccelerationClosedForm) {
  qtest::Gen gen(32);
  for (int t = 0; t < 30; ++t) {
    const PlanarRigidBodyParams p = gen.rigid_params();
    const double m = p.mass, J = p.inertia, h = p.offset;
    const ReducedProblem rp(planar_rigid_body(p));
    const Vector q = gen.vec(3), y = gen.vec(3), ydot = gen.vec(3);
    const Vector phi = constraint_values(rp, SecondOrderPoint<double>{q, y, ydot});
    EXPECT_NEAR(phi(0), displayed_equations(p, y, ydot)(2), 1e-12);
    const Vector G = solve_constraints(rp, q, y, Vector(ydot.head(2)));
    EXPECT_NEAR(G(0), -h * h / ((J + m * h * h) * J) * y(0) * y(1) - h / (J + m * h * h) * y(0) * y(2), 1e-12);
  }
}

TEST(Reduction, DisplayedControlsAreMassScaledFrameControls) {
  // The recovered controls are dual to the frame fields, u_a = E_a. The
  // displayed controls equal m * E_a, so the two agree only at unit mass.
  qtest::Gen gen(33);
  for (int t = 0; t < 30; ++t) {
    const PlanarRigidBodyParams p = gen.rigid_params();
    const ReducedProblem rp(planar_rigid_body(p));
    const Vector q = gen.vec(3), y = gen.vec(3), ya = gen.vec(2);
    const auto pt = on_m(rp, q, y, ya);
    const Vector u = recover_controls(rp, pt);
    const Vector shown = displayed_equations(p, y, pt.ydot);
    EXPECT_NEAR(shown(0), p.mass * u(0), 1e-11);
    EXPECT_NEAR(shown(1), p.mass * u(1), 1e-11);
  }
  const ReducedProblem unit(planar_rigid_body());
  const Vector y = gen.vec(3);
  const auto pt = on_m(unit, gen.vec(3), y, gen.vec(2));
  EXPECT_LE((recover_controls(unit, pt) - displayed_equations({}, y, pt.ydot).head(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reduction, ControlsMatchPhysicalForces) {
  // Body-frame force components: F1 = m u1, F2 = mJ/(J + m h^2) u2, then
  // m xdd = F1 cos - F2 sin, m ydd = F1 sin + F2 cos, J thdd = -h F2.
  qtest::Gen gen(34);
  for (int t = 0; t < 20; ++t) {
    const PlanarRigidBodyParams p = gen.rigid_params();
    const double m = p.mass, J = p.inertia, h = p.offset;
    const MechanicalSystem sys = planar_rigid_body(p);
    const Vector q = gen.vec(3), y = gen.vec(3), u = gen.vec(2);
    const QuasiRates r = forced_dynamics(sys, q, y, u);
    const double F1 = m * u(0), F2 = m * J / (J + m * h * h) * u(1);
    // qddot from qdot = X(q) y: differentiate along the flow numerically.
    const double dt = 1e-6;
    const Vector qp = q + dt * r.qdot, yp = y + dt * r.ydot;
    const Vector qm = q - dt * r.qdot, ym = y - dt * r.ydot;
    const Vector qddot = (quasi_to_velocity(sys, qp, yp) - quasi_to_velocity(sys, qm, ym)) / (2.0 * dt);
    const double c = std::cos(q(2)), s = std::sin(q(2));
    EXPECT_NEAR(m * qddot(0), F1 * c - F2 * s, 1e-6);
    EXPECT_NEAR(m * qddot(1), F1 * s + F2 * c, 1e-6);
    EXPECT_NEAR(J * qddot(2), -h * F2, 1e-6);
  }
}

TEST(Reduction, ConstraintsAreAffineInAccelerations) {
  qtest::Gen gen(35);
  const ReducedProblem rp(planar_rigid_body(gen.rigid_params()));
  for (int t = 0; t < 20; ++t)
    EXPECT_LE(affinity_defect(rp, gen.vec(3), gen.vec(3), gen.vec(3), gen.vec(3)), 1e-9);
}

TEST(Reduction, NewtonAndLinearSolversAgree) {
  qtest::Gen gen(36);
  ReducedProblem lin(planar_rigid_body(gen.rigid_params()));
  ReducedProblem newton = lin;
  newton.solver = ConstraintSolve::newton;
  for (int t = 0; t < 10; ++t) {
    const Vector q = gen.vec(3), y = gen.vec(3), ya = gen.vec(2);
    const MPoint<double> a = evaluate_on_m(lin, q, y, ya);
    const MPoint<double> b = evaluate_on_m(newton, q, y, ya);
    EXPECT_LE((a.G - b.G).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a.u - b.u).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reduction, TildeLIsCostOfRecoveredControls) {
  qtest::Gen gen(37);
  const ReducedProblem rp(planar_rigid_body(gen.rigid_params()));
  const Vector q = gen.vec(3), y = gen.vec(3), ya = gen.vec(2);
  const Vector u = recover_controls(rp, on_m(rp, q, y, ya));
  EXPECT_NEAR(tilde_L(rp, q, y, ya), 0.5 * u.squaredNorm(), 1e-13);
}

TEST(Reduction, SingularUnactuatedBlockIsDetected) {
  // l carries no kinetic energy in the unactuated direction.
  auto lag = [](const auto&, const auto& v) { return 0.5 * v(0) * v(0); };
  const ReducedProblem rp(coordinate_wrap(lag, 2, 1));
  const Vector z = Vector::Zero(2);
  EXPECT_THROW((void)solve_constraints(rp, z, z, Vector(Vector::Zero(1))), SingularHessianBlock);
}
