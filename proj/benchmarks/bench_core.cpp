#include <benchmark/benchmark.h>

#include "quasiopt/flow.hpp"
#include "quasiopt/systems.hpp"

using namespace quasiopt;

namespace {

W1State<double> probe_state() {
  W1State<double> w{Vector(3), Vector(3), Vector(2), Vector(3), Vector(1)};
  w.q << 0.1, -0.2, 0.3;
  w.y << 0.5, 0.2, -0.3;
  w.ydot_a << 0.2, -0.1;
  w.p << 0.3, -0.2, 0.4;
  w.ptilde_alpha << 0.25;
  return w;
}

void BM_StructureCoefficients(benchmark::State& state) {
  const MechanicalSystem sys = planar_rigid_body();
  const Vector q = probe_state().q;
  for (auto _ : state) benchmark::DoNotOptimize(structure_coefficients(sys, q));
}
BENCHMARK(BM_StructureCoefficients);

void BM_W1VectorField(benchmark::State& state) {
  const ReducedProblem rp(planar_rigid_body());
  const W1State<double> w = probe_state();
  for (auto _ : state) benchmark::DoNotOptimize(w1_vector_field(rp, w));
}
BENCHMARK(BM_W1VectorField)->Unit(benchmark::kMicrosecond);

void BM_IntegrateRk4(benchmark::State& state) {
  const ReducedProblem rp(planar_rigid_body());
  IntegratorConfig cfg;
  cfg.dt = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(rp, probe_state(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegrateRk4)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ShootPointMass(benchmark::State& state) {
  const ReducedProblem rp(point_mass_lq());
  BvpSpec spec;
  spec.q0 = spec.y0 = spec.yf = Vector::Zero(2);
  spec.qf = Vector::Zero(2);
  spec.qf(0) = 1.0;
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(shoot(rp, spec, cfg));
}
BENCHMARK(BM_ShootPointMass)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
