#pragma once
/// @file flow.hpp
/// @brief Integration of the W1 vector field, invariant monitors, and the
/// shooting solver for the two-point boundary-value problem.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quasiopt/linalg.hpp"
#include "quasiopt/reduction.hpp"
#include "quasiopt/skinner_rusk.hpp"

namespace quasiopt {

enum class IntegratorMethod { rk4, rk45 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk4;
  double dt = 1e-3;    ///< fixed step (rk4); initial step (rk45)
  double rtol = 1e-8;  ///< rk45 only
  double atol = 1e-10; ///< rk45 only
  double t0 = 0.0;
  double tf = 1.0;
  int save_every = 1;  ///< log every k-th (accepted) step; the final state is always logged
  double min_step = 1e-12;

  /// Throws InvalidArgument on t0 > tf, dt <= 0 or dt > tf - t0 (when tf > t0).
  void validate() const;
};

enum class TrajectoryStatus { complete, regularity_failure, non_finite };

struct TrajectoryLog {
  int n = 0;
  int m = 0;
  std::vector<double> times;
  std::vector<W1State<double>> states;
  std::vector<double> hamiltonian;
  /// max_a |ptilde_a(carried) - ptilde_a(recovered)|: drift of the primary constraints.
  std::vector<double> constraint_residual;
  std::vector<Vector> controls;
  TrajectoryStatus status = TrajectoryStatus::complete;
  std::string message;

  std::size_t size() const { return times.size(); }
  bool complete() const { return status == TrajectoryStatus::complete; }
};

/// Single classical RK4 step for z' = f(t, z).
template <class F>
Vector rk4_step(F&& f, double t, const Vector& z, double h) {
  const Vector k1 = f(t, z);
  const Vector k2 = f(t + 0.5 * h, Vector(z + 0.5 * h * k1));
  const Vector k3 = f(t + 0.5 * h, Vector(z + 0.5 * h * k2));
  const Vector k4 = f(t + h, Vector(z + h * k3));
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct AdaptiveStep {
  Vector z;
  double error = 0.0;  ///< scaled RMS error estimate; accept when <= 1
};

/// One Dormand-Prince 5(4) step with embedded error estimate.
AdaptiveStep dopri_step(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& z,
                        double h, double rtol, double atol);

/// Generic fixed/adaptive integration of z' = f(t, z). `observe` is called at
/// t0 and after every accepted step with (t, z, step_index).
void integrate_ode(const std::function<Vector(double, const Vector&)>& f, const Vector& z0,
                   const IntegratorConfig& cfg,
                   const std::function<void(double, const Vector&, long)>& observe);

/// Integrates the W1 field from w0. Throws RegularityFailure if R is singular
/// at w0; later failures truncate the log and set its status.
TrajectoryLog integrate(const ReducedProblem& rp, const W1State<double>& w0, const IntegratorConfig& cfg);

/// Max over probe pairs (directions[2i], directions[2i+1]) of
/// |Omega_W1(DF V, DF W) at F(w0) - Omega_W1(V, W) at w0|, with DF and the
/// lift differential taken by central differences (step 1e-5).
double monitor_symplecticity(const ReducedProblem& rp, const W1State<double>& w0, const IntegratorConfig& cfg,
                             const std::vector<Vector>& probe_directions);

/// Omega pulled back to W1 at w, applied to (a, b).
double omega_w1(const ReducedProblem& rp, const W1State<double>& w, const Vector& a, const Vector& b);

struct NewtonSettings {
  int max_iter = 30;
  double residual_tol = 1e-10;
  double fd_step = 1e-6;
  int max_backtracks = 20;
};

struct BvpSpec {
  Vector q0, y0;
  Vector qf, yf;
  /// Initial guess for (ydot^a(t0), p(t0), ptilde_alpha(t0)); zeros if empty.
  Vector guess;
  NewtonSettings newton;
};

struct BvpResult {
  TrajectoryLog log;
  bool converged = false;
  double residual = 0.0;  ///< max-norm terminal mismatch
  int iterations = 0;
  Vector unknowns;
};

/// Newton shooting on the 2n unknown initial costate data.
BvpResult shoot(const ReducedProblem& rp, const BvpSpec& spec, const IntegratorConfig& cfg);

/// Cost functional by quadrature of C(q, y, u) over the logged trajectory
/// (Simpson on uniform grids with an odd point count, trapezoid otherwise).
double trajectory_cost(const ReducedProblem& rp, const TrajectoryLog& log);

/// Integrates the controlled Hamel equations forward with the controls stored
/// in the log, using RK4 with steps spanning two log intervals so every stage
/// lands on a logged sample. Returns the final (q, y) stacked.
Vector resimulate_open_loop(const MechanicalSystem& sys, const TrajectoryLog& log);

}  // namespace quasiopt
