#include "quasiopt/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace quasiopt {

void IntegratorConfig::validate() const {
  if (!(std::isfinite(t0) && std::isfinite(tf))) throw InvalidArgument("time span must be finite");
  if (tf < t0) throw InvalidArgument("integration requires t0 <= tf");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (tf > t0 && dt > (tf - t0) * (1.0 + 1e-12)) throw InvalidArgument("dt must not exceed tf - t0");
  if (save_every < 1) throw InvalidArgument("save_every must be >= 1");
  if (method == IntegratorMethod::rk45 && !(rtol > 0.0 && atol > 0.0))
    throw InvalidArgument("rk45 needs positive rtol and atol");
}

AdaptiveStep dopri_step(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& z,
                        double h, double rtol, double atol) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Vector k1 = f(t, z);
  const Vector k2 = f(t + c2 * h, Vector(z + h * a21 * k1));
  const Vector k3 = f(t + c3 * h, Vector(z + h * (a31 * k1 + a32 * k2)));
  const Vector k4 = f(t + c4 * h, Vector(z + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vector k5 = f(t + c5 * h, Vector(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vector k6 = f(t + h, Vector(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  AdaptiveStep out;
  out.z = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vector k7 = f(t + h, out.z);
  const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(z(i)), std::abs(out.z(i)));
    acc += (err(i) / sc) * (err(i) / sc);
  }
  out.error = z.size() > 0 ? std::sqrt(acc / static_cast<double>(z.size())) : 0.0;
  return out;
}

void integrate_ode(const std::function<Vector(double, const Vector&)>& f, const Vector& z0,
                   const IntegratorConfig& cfg, const std::function<void(double, const Vector&, long)>& observe) {
  cfg.validate();
  double t = cfg.t0;
  Vector z = z0;
  observe(t, z, 0);
  if (cfg.tf == cfg.t0) return;
  const double span = cfg.tf - cfg.t0;

  if (cfg.method == IntegratorMethod::rk4) {
    const long steps = std::max(1L, static_cast<long>(std::ceil(span / cfg.dt - 1e-9)));
    for (long i = 1; i <= steps; ++i) {
      const double t_next = i == steps ? cfg.tf : cfg.t0 + static_cast<double>(i) * cfg.dt;
      z = rk4_step(f, t, z, t_next - t);
      t = t_next;
      observe(t, z, i);
    }
    return;
  }

  // Dormand-Prince with a PI step-size controller.
  double h = std::min(cfg.dt, span);
  double prev_error = 1e-4;
  long accepted = 0;
  while (t < cfg.tf) {
    const bool last = t + h >= cfg.tf * (1.0 - 1e-15) - 1e-300 || cfg.tf - t - h < cfg.min_step;
    const double step = last ? cfg.tf - t : h;
    const AdaptiveStep s = dopri_step(f, t, z, step, cfg.rtol, cfg.atol);
    if (!std::isfinite(s.error)) {
      h = 0.2 * step;
    } else if (s.error <= 1.0) {
      t = last ? cfg.tf : t + step;
      z = s.z;
      ++accepted;
      observe(t, z, accepted);
      const double err = std::max(s.error, 1e-10);
      const double factor = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(prev_error, 0.4 / 5.0);
      h = step * std::clamp(factor, 0.2, 5.0);
      prev_error = err;
      continue;
    } else {
      h = step * std::max(0.2, 0.9 * std::pow(s.error, -0.2));
    }
    if (h < cfg.min_step) throw StepSizeUnderflow("adaptive step size fell below the minimum");
  }
}

namespace {

/// Integration state: the W1 coordinates plus a carried copy of ptilde_a.
struct AugmentedLayout {
  int n, m;
  int w1() const { return 4 * n; }
  int size() const { return 4 * n + m; }
};

void record(const ReducedProblem& rp, const AugmentedLayout& lay, double t, const Vector& z, TrajectoryLog& log) {
  const W1State<double> w = w1_from_vector(z.head(lay.w1()), lay.n, lay.m);
  const W0State<double> w0 = lift_to_w1(rp, w);
  const MPoint<double> mp = evaluate_on_m(rp, w.q, w.y, w.ydot_a);
  log.times.push_back(t);
  log.states.push_back(w);
  log.hamiltonian.push_back(hamiltonian(rp, w0));
  log.constraint_residual.push_back((z.tail(lay.m) - w0.ptilde.head(lay.m)).cwiseAbs().maxCoeff());
  log.controls.push_back(mp.u);
}

struct StopIntegration {};

}  // namespace

TrajectoryLog integrate(const ReducedProblem& rp, const W1State<double>& w0, const IntegratorConfig& cfg) {
  cfg.validate();
  const AugmentedLayout lay{rp.sys.n(), rp.sys.m()};
  const RegularityReport rep = regularity(rp, w0);
  if (!rep.symplectic) {
    std::ostringstream os;
    os << "regularity fails at the initial state (det R = " << rep.det << ")";
    throw RegularityFailure(os.str(), rep.det);
  }

  TrajectoryLog log;
  log.n = lay.n;
  log.m = lay.m;
  Vector z0(lay.size());
  z0 << to_vector(w0), lift_to_w1(rp, w0).ptilde.head(lay.m);

  auto rhs = [&](double, const Vector& z) -> Vector {
    const W1Field f = w1_vector_field(rp, w1_from_vector(z.head(lay.w1()), lay.n, lay.m));
    Vector out(lay.size());
    out << to_vector(f.rate), f.ptilde_a_rate;
    return out;
  };

  double last_t = cfg.t0;
  Vector last_z = z0;
  bool last_logged = false;
  auto observe = [&](double t, const Vector& z, long step) {
    if (!z.allFinite()) {
      log.status = TrajectoryStatus::non_finite;
      log.message = "state became non-finite at t = " + std::to_string(t);
      throw StopIntegration{};
    }
    last_t = t;
    last_z = z;
    last_logged = step % cfg.save_every == 0;
    if (last_logged) record(rp, lay, t, z, log);
  };

  try {
    integrate_ode(rhs, z0, cfg, observe);
  } catch (const StopIntegration&) {
  } catch (const RegularityFailure& e) {
    log.status = TrajectoryStatus::regularity_failure;
    log.message = e.what();
  } catch (const NonFiniteEvaluation& e) {
    log.status = TrajectoryStatus::non_finite;
    log.message = e.what();
  }
  if (!last_logged && last_z.allFinite()) {
    try {
      record(rp, lay, last_t, last_z, log);
    } catch (const Error&) {
    }
  }
  return log;
}

namespace {

Matrix lift_differential_fd(const ReducedProblem& rp, const W1State<double>& w, double eps) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  const Vector base = to_vector(w);
  Matrix L(w0_dimension(n, m), base.size());
  for (Eigen::Index j = 0; j < base.size(); ++j) {
    Vector plus = base, minus = base;
    plus(j) += eps;
    minus(j) -= eps;
    L.col(j) = (to_vector(lift_to_w1(rp, w1_from_vector(plus, n, m))) -
                to_vector(lift_to_w1(rp, w1_from_vector(minus, n, m)))) /
               (2.0 * eps);
  }
  return L;
}

constexpr double kMonitorStep = 1e-5;

}  // namespace

double omega_w1(const ReducedProblem& rp, const W1State<double>& w, const Vector& a, const Vector& b) {
  const Matrix L = lift_differential_fd(rp, w, kMonitorStep);
  return (L * a).dot(presymplectic_form(rp.sys.n(), rp.sys.m()) * (L * b));
}

double monitor_symplecticity(const ReducedProblem& rp, const W1State<double>& w0, const IntegratorConfig& cfg,
                             const std::vector<Vector>& probe_directions) {
  cfg.validate();
  if (probe_directions.size() % 2 != 0) throw InvalidArgument("probe directions come in pairs");
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  for (const Vector& v : probe_directions)
    if (v.size() != w1_dimension(n)) throw InvalidArgument("probe direction must have length 4n");
  if (cfg.tf == cfg.t0 || probe_directions.empty()) return 0.0;

  auto flow_map = [&](const Vector& x) -> Vector {
    const TrajectoryLog log = integrate(rp, w1_from_vector(x, n, m), cfg);
    if (!log.complete()) throw RegularityFailure("flow map failed: " + log.message, 0.0);
    return to_vector(log.states.back());
  };
  const Vector base = to_vector(w0);
  const Vector image = flow_map(base);
  const W1State<double> wT = w1_from_vector(image, n, m);
  const Matrix omega = presymplectic_form(n, m);
  const Matrix L0 = lift_differential_fd(rp, w0, kMonitorStep);
  const Matrix LT = lift_differential_fd(rp, wT, kMonitorStep);

  std::vector<Vector> pushed;
  pushed.reserve(probe_directions.size());
  for (const Vector& v : probe_directions)
    pushed.push_back((flow_map(base + kMonitorStep * v) - flow_map(base - kMonitorStep * v)) / (2.0 * kMonitorStep));

  double drift = 0.0;
  for (std::size_t i = 0; i + 1 < probe_directions.size(); i += 2) {
    const double before = (L0 * probe_directions[i]).dot(omega * (L0 * probe_directions[i + 1]));
    const double after = (LT * pushed[i]).dot(omega * (LT * pushed[i + 1]));
    drift = std::max(drift, std::abs(after - before));
  }
  return drift;
}

BvpResult shoot(const ReducedProblem& rp, const BvpSpec& spec, const IntegratorConfig& cfg) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  const int k = n - m;
  if (spec.q0.size() != n || spec.y0.size() != n || spec.qf.size() != n || spec.yf.size() != n)
    throw InvalidArgument("boundary data must be n-vectors");
  if (spec.guess.size() != 0 && spec.guess.size() != 2 * n)
    throw InvalidArgument("shooting guess must have 2n entries");
  cfg.validate();

  auto make_state = [&](const Vector& z) {
    return W1State<double>{spec.q0, spec.y0, z.head(m), z.segment(m, n), z.tail(k)};
  };
  struct Shot {
    TrajectoryLog log;
    Vector residual;
  };
  auto fire = [&](const Vector& z) -> Shot {
    Shot s{integrate(rp, make_state(z), cfg), Vector()};
    if (!s.log.complete()) throw RegularityFailure("trial shot failed: " + s.log.message, 0.0);
    const W1State<double>& end = s.log.states.back();
    s.residual.resize(2 * n);
    s.residual << end.q - spec.qf, end.y - spec.yf;
    return s;
  };

  BvpResult out;
  Vector z = spec.guess.size() == 0 ? Vector(Vector::Zero(2 * n)) : spec.guess;
  Shot current = fire(z);
  const NewtonSettings& nw = spec.newton;
  int it = 0;
  while (current.residual.cwiseAbs().maxCoeff() > nw.residual_tol && it < nw.max_iter) {
    Matrix J(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
      const double h = nw.fd_step * std::max(1.0, std::abs(z(j)));
      Vector zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (fire(zp).residual - fire(zm).residual) / (2.0 * h);
    }
    // Minimum-norm least-squares step; tolerates rank-deficient linearizations.
    Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    const Vector delta = -svd.solve(current.residual);

    const double norm0 = current.residual.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int b = 0; b <= nw.max_backtracks; ++b, lambda *= 0.5) {
      try {
        Shot trial = fire(z + lambda * delta);
        if (trial.residual.norm() < (1.0 - 1e-4 * lambda) * norm0) {
          z += lambda * delta;
          current = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const RegularityFailure&) {
      } catch (const NonFiniteEvaluation&) {
      } catch (const SingularHessianBlock&) {
      }
    }
    ++it;
    if (!accepted) break;
  }
  out.log = std::move(current.log);
  out.residual = current.residual.cwiseAbs().maxCoeff();
  out.converged = out.residual <= nw.residual_tol;
  out.iterations = it;
  out.unknowns = z;
  return out;
}

double trajectory_cost(const ReducedProblem& rp, const TrajectoryLog& log) {
  const std::size_t N = log.size();
  if (N < 2) return 0.0;
  std::vector<double> c(N);
  for (std::size_t i = 0; i < N; ++i)
    c[i] = rp.sys.model().at<double>().cost(log.states[i].q, log.states[i].y, log.controls[i]);
  const double h = log.times[1] - log.times[0];
  bool uniform = true;
  for (std::size_t i = 1; i < N; ++i)
    if (std::abs((log.times[i] - log.times[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) uniform = false;
  if (uniform && N % 2 == 1 && N >= 3) {
    double s = c[0] + c[N - 1];
    for (std::size_t i = 1; i + 1 < N; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * c[i];
    return s * h / 3.0;
  }
  double s = 0.0;
  for (std::size_t i = 1; i < N; ++i) s += 0.5 * (c[i] + c[i - 1]) * (log.times[i] - log.times[i - 1]);
  return s;
}

Vector resimulate_open_loop(const MechanicalSystem& sys, const TrajectoryLog& log) {
  const int n = sys.n();
  if (log.size() == 0) throw InvalidArgument("empty trajectory");
  auto control_at = [&](double t) -> Vector {
    const auto it = std::upper_bound(log.times.begin(), log.times.end(), t);
    if (it == log.times.begin()) return log.controls.front();
    if (it == log.times.end()) return log.controls.back();
    const std::size_t i = static_cast<std::size_t>(it - log.times.begin());
    const double t0 = log.times[i - 1], t1 = log.times[i];
    const double s = (t - t0) / (t1 - t0);
    return (1.0 - s) * log.controls[i - 1] + s * log.controls[i];
  };
  auto f = [&](double t, const Vector& z) -> Vector {
    const QuasiRates r = forced_dynamics(sys, z.head(n), z.tail(n), control_at(t));
    Vector out(2 * n);
    out << r.qdot, r.ydot;
    return out;
  };
  Vector z(2 * n);
  z << log.states.front().q, log.states.front().y;
  std::size_t i = 0;
  const std::size_t last = log.size() - 1;
  while (i < last) {
    const std::size_t j = std::min(i + 2, last);
    z = rk4_step(f, log.times[i], z, log.times[j] - log.times[i]);
    i = j;
  }
  return z;
}

}  // namespace quasiopt
