#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/LU>

#include "quasiopt/flow.hpp"
#include "test_support.hpp"

using namespace quasiopt;

namespace {

W1State<double> rigid_state() {
  W1State<double> w{Vector(3), Vector(3), Vector(2), Vector(3), Vector(1)};
  w.q << 0.1, -0.2, 0.3;
  w.y << 0.5, 0.2, -0.3;
  w.ydot_a << 0.2, -0.1;
  w.p << 0.3, -0.2, 0.4;
  w.ptilde_alpha << 0.25;
  return w;
}

double max_drift(const std::vector<double>& h) {
  double d = 0.0;
  for (double x : h) d = std::max(d, std::abs(x - h.front()));
  return d;
}

}  // namespace

TEST(Flow, Rk4LocalErrorIsFifthOrder) {
  // z' = z: one-step error of RK4 is h^5/120 + O(h^6).
  auto f = [](double, const Vector& z) { return z; };
  Vector z0(1);
  z0 << 1.0;
  auto err = [&](double h) { return std::abs(rk4_step(f, 0.0, z0, h)(0) - std::exp(h)); };
  EXPECT_NEAR(err(0.1) / (std::pow(0.1, 5) / 120.0), 1.0, 0.05);
  EXPECT_NEAR(std::log2(err(0.1) / err(0.05)), 5.0, 0.1);
}

TEST(Flow, DopriMatchesExactSolution) {
  auto f = [](double, const Vector& z) {
    Vector out(2);
    out << z(1), -z(0);
    return out;
  };
  Vector z0(2);
  z0 << 1.0, 0.0;
  IntegratorConfig cfg;
  cfg.method = IntegratorMethod::rk45;
  cfg.dt = 0.1;
  cfg.tf = 3.0;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  Vector last;
  double t_last = 0.0;
  integrate_ode(f, z0, cfg, [&](double t, const Vector& z, long) {
    t_last = t;
    last = z;
  });
  EXPECT_DOUBLE_EQ(t_last, 3.0);
  EXPECT_NEAR(last(0), std::cos(3.0), 1e-8);
  EXPECT_NEAR(last(1), -std::sin(3.0), 1e-8);
}

TEST(Flow, ConfigValidation) {
  IntegratorConfig cfg;
  cfg.tf = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = IntegratorConfig{};
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = IntegratorConfig{};
  cfg.dt = 2.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = IntegratorConfig{};
  cfg.save_every = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Flow, ZeroSpanLogsInitialStateOnly) {
  const ReducedProblem rp(planar_rigid_body());
  IntegratorConfig cfg;
  cfg.tf = 0.0;
  const TrajectoryLog log = integrate(rp, rigid_state(), cfg);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(to_vector(log.states[0]), to_vector(rigid_state()));
  EXPECT_EQ(log.constraint_residual[0], 0.0);
}

TEST(Flow, SaveEveryGivesExpectedRowCount) {
  const ReducedProblem rp(planar_rigid_body());
  IntegratorConfig cfg;
  cfg.save_every = 10;
  const TrajectoryLog log = integrate(rp, rigid_state(), cfg);
  EXPECT_EQ(log.size(), 101u);
  EXPECT_DOUBLE_EQ(log.times.back(), 1.0);
  EXPECT_LE(max_drift(log.hamiltonian), 1e-8);
}

TEST(Flow, RigidBodyInvariantsAndOrder) {
  const ReducedProblem rp(planar_rigid_body());
  W1State<double> w = rigid_state();
  for (Vector* v : {&w.y, &w.ydot_a, &w.p, &w.ptilde_alpha}) *v *= 13.0;
  IntegratorConfig cfg;
  const TrajectoryLog coarse = integrate(rp, w, cfg);
  cfg.dt = 5e-4;
  const TrajectoryLog fine = integrate(rp, w, cfg);
  ASSERT_TRUE(coarse.complete());
  double phi = 0.0;
  for (double r : coarse.constraint_residual) phi = std::max(phi, r);
  EXPECT_LE(phi, 1e-6);
  EXPECT_LE(max_drift(coarse.hamiltonian), 1e-8);
  EXPECT_NEAR(max_drift(coarse.hamiltonian) / max_drift(fine.hamiltonian), 16.0, 16.0 * 0.3);
}

TEST(Flow, AdaptiveAgreesWithFixedStep) {
  const ReducedProblem rp(planar_rigid_body());
  IntegratorConfig fixed;
  IntegratorConfig adaptive;
  adaptive.method = IntegratorMethod::rk45;
  adaptive.dt = 1e-2;
  adaptive.rtol = 1e-11;
  adaptive.atol = 1e-12;
  const TrajectoryLog a = integrate(rp, rigid_state(), fixed);
  const TrajectoryLog b = integrate(rp, rigid_state(), adaptive);
  EXPECT_DOUBLE_EQ(b.times.back(), 1.0);
  EXPECT_LE((to_vector(a.states.back()) - to_vector(b.states.back())).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(b.size(), a.size());
}

TEST(Flow, SingularInitialRegularityThrows) {
  RigidBodyOptions opt;
  opt.cost.kind = CostSpec::Kind::constant;
  const ReducedProblem rp(planar_rigid_body({}, opt));
  EXPECT_THROW((void)integrate(rp, rigid_state(), IntegratorConfig{}), RegularityFailure);
}

TEST(Flow, SymplecticityMonitorZeroSpanIsExact) {
  const ReducedProblem rp(planar_rigid_body());
  IntegratorConfig cfg;
  cfg.tf = 0.0;
  qtest::Gen gen(51);
  EXPECT_EQ(monitor_symplecticity(rp, rigid_state(), cfg, {gen.vec(12), gen.vec(12)}), 0.0);
  EXPECT_THROW((void)monitor_symplecticity(rp, rigid_state(), cfg, {gen.vec(12)}), InvalidArgument);
}

TEST(Flow, OmegaOnW1IsAntisymmetricAndNondegenerate) {
  const ReducedProblem rp(planar_rigid_body());
  qtest::Gen gen(52);
  const Vector a = gen.vec(12), b = gen.vec(12);
  EXPECT_NEAR(omega_w1(rp, rigid_state(), a, b), -omega_w1(rp, rigid_state(), b, a), 1e-9);
  const Matrix L = lift_differential(rp, rigid_state());
  const Matrix pulled = L.transpose() * presymplectic_form(3, 2) * L;
  EXPECT_GT(std::abs(pulled.determinant()), 1e-6);
}

TEST(Flow, ShootingRecoversLqClosedForm) {
  const ReducedProblem rp(point_mass_lq());
  BvpSpec spec;
  spec.q0 = Vector::Zero(2);
  spec.y0 = Vector::Zero(2);
  spec.qf = Vector::Zero(2);
  spec.qf(0) = 1.0;
  spec.yf = Vector::Zero(2);
  const BvpResult r = shoot(rp, spec, IntegratorConfig{});
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    const double t = r.log.times[i];
    EXPECT_NEAR(r.log.controls[i](0), 6.0 - 12.0 * t, 1e-6);
    EXPECT_NEAR(r.log.states[i].q(0), 3 * t * t - 2 * t * t * t, 1e-6);
  }
  EXPECT_NEAR(trajectory_cost(rp, r.log), 6.0, 1e-4);
}

TEST(Flow, ShootingZeroLengthManeuver) {
  const ReducedProblem rp(point_mass_lq());
  BvpSpec spec;
  spec.q0 = spec.qf = Vector::Constant(2, 0.4);
  spec.y0 = spec.yf = Vector::Zero(2);
  const BvpResult r = shoot(rp, spec, IntegratorConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_NEAR(trajectory_cost(rp, r.log), 0.0, 1e-12);
}

TEST(Flow, ShootingReportsNonConvergence) {
  const ReducedProblem rp(point_mass_lq());
  BvpSpec spec;
  spec.q0 = Vector::Zero(2);
  spec.y0 = Vector::Zero(2);
  spec.qf = Vector::Ones(2);
  spec.yf = Vector::Zero(2);
  spec.newton.max_iter = 0;
  const BvpResult r = shoot(rp, spec, IntegratorConfig{});
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.residual, 1.0, 1e-12);
}

TEST(Flow, TrajectoryCostQuadrature) {
  const ReducedProblem rp(point_mass_lq());
  TrajectoryLog log;
  log.n = 2;
  log.m = 1;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.1 * i;
    log.times.push_back(t);
    log.states.push_back(W1State<double>{Vector::Zero(2), Vector::Zero(2), Vector::Zero(1), Vector::Zero(2),
                                         Vector::Zero(1)});
    log.controls.push_back(Vector::Constant(1, t * t));
    log.hamiltonian.push_back(0.0);
    log.constraint_residual.push_back(0.0);
  }
  // 1/2 int_0^1 t^4 dt = 0.1; Simpson is exact up to cubics, so allow its O(h^4) error.
  EXPECT_NEAR(trajectory_cost(rp, log), 0.1, 1e-5);
}

TEST(Flow, OpenLoopResimulationHitsTarget) {
  const ReducedProblem rp(planar_rigid_body());
  BvpSpec spec;
  spec.q0 = Vector::Zero(3);
  spec.y0 = Vector::Zero(3);
  spec.qf = Vector::Zero(3);
  spec.qf(0) = 0.1;
  spec.yf = Vector::Zero(3);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const BvpResult r = shoot(rp, spec, cfg);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-6);
  Vector target(6);
  target << spec.qf, spec.yf;
  EXPECT_LE((resimulate_open_loop(rp.sys, r.log) - target).cwiseAbs().maxCoeff(), 1e-5);
}
