#include "quasiopt/skinner_rusk.hpp"

#include <cmath>
#include <sstream>

namespace quasiopt {

namespace {

template <class S>
W1State<S> unpack_w1(const Vec<S>& v, int n, int m) {
  const int k = n - m;
  return W1State<S>{v.segment(0, n), v.segment(n, n), v.segment(2 * n, m), v.segment(2 * n + m, n),
                    v.segment(3 * n + m, k)};
}

template <class S>
W0State<S> unpack_w0(const Vec<S>& v, int n, int m) {
  return W0State<S>{v.segment(0, n), v.segment(n, n), v.segment(2 * n, m), v.segment(2 * n + m, n),
                    v.segment(3 * n + m, n)};
}

template <class S>
Vec<S> pack(const W0State<S>& w) {
  const Eigen::Index n = w.q.size();
  const Eigen::Index m = w.ydot_a.size();
  Vec<S> v(4 * n + m);
  v << w.q, w.y, w.ydot_a, w.p, w.ptilde;
  return v;
}

template <class S>
Vec<S> pack(const W1State<S>& w) {
  const Eigen::Index n = w.q.size();
  const Eigen::Index m = w.ydot_a.size();
  Vec<S> v(4 * n);
  (void)m;
  v << w.q, w.y, w.ydot_a, w.p, w.ptilde_alpha;
  return v;
}

void check_sizes(const ReducedProblem& rp, const W1State<double>& w) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  if (w.q.size() != n || w.y.size() != n || w.ydot_a.size() != m || w.p.size() != n ||
      w.ptilde_alpha.size() != n - m)
    throw InvalidArgument("W1 state has inconsistent dimensions");
}

}  // namespace

Vector to_vector(const W0State<double>& w) { return pack(w); }
Vector to_vector(const W1State<double>& w) { return pack(w); }

W0State<double> w0_from_vector(const Vector& v, int n, int m) {
  if (v.size() != w0_dimension(n, m)) throw InvalidArgument("W0 vector has wrong length");
  return unpack_w0(v, n, m);
}

W1State<double> w1_from_vector(const Vector& v, int n, int m) {
  if (v.size() != w1_dimension(n)) throw InvalidArgument("W1 vector has wrong length");
  return unpack_w1(v, n, m);
}

Matrix presymplectic_form(int n, int m) {
  if (n < 0 || m < 0) throw InvalidArgument("dimensions must be non-negative");
  const int dim = 4 * n + m;
  Matrix omega = Matrix::Zero(dim, dim);
  const int q0 = 0, y0 = n, p0 = 2 * n + m, pt0 = 3 * n + m;
  for (int i = 0; i < n; ++i) {
    omega(q0 + i, p0 + i) = 1.0;
    omega(p0 + i, q0 + i) = -1.0;
    omega(y0 + i, pt0 + i) = 1.0;
    omega(pt0 + i, y0 + i) = -1.0;
  }
  return omega;
}

RegularityReport regularity(const ReducedProblem& rp, const W1State<double>& w) {
  check_sizes(rp, w);
  const int m = rp.sys.m();
  auto k_of_ya = [&](const auto& ya) {
    using T = detail::scalar_of<decltype(ya)>;
    return constraint_potential(rp, promote<T>(w.q), promote<T>(w.y), ya, promote<T>(w.ptilde_alpha));
  };
  RegularityReport rep;
  rep.R = numdiff::hessian(k_of_ya, w.ydot_a, rp.sys.diff());
  rep.R = 0.5 * (rep.R + rep.R.transpose()).eval();
  const SmallLu<double> lu(rep.R);
  rep.det = lu.determinant();
  rep.condition = condition_number(rep.R);
  const double scale = max_abs(rep.R);
  rep.symplectic = scale > 0.0 && std::abs(rep.det) > kRegularityTolerance * std::pow(scale, m);
  return rep;
}

W1Field w1_vector_field(const ReducedProblem& rp, const W1State<double>& w) {
  check_sizes(rp, w);
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  const int k = n - m;
  const DiffConfig& cfg = rp.sys.diff();

  const Matrix X = frame_at(rp.sys, w.q);
  const Vector dq = X * w.y;
  const MPoint<double> mp = evaluate_on_m(rp, w.q, w.y, w.ydot_a);
  Vector dy(n);
  dy << w.ydot_a, mp.G;

  // dH~/dq and dH~/dy. The ptilde_a ydot^a term does not depend on (q, y).
  auto h_of_qy = [&](const auto& z) {
    using T = detail::scalar_of<decltype(z)>;
    const Vec<T> q = z.head(n);
    const Vec<T> y = z.tail(n);
    const MPoint<T> mpt = evaluate_on_m(rp, q, y, promote<T>(w.ydot_a));
    const Vec<T> v = frame_at(rp.sys, q) * y;
    return promote<T>(w.p).dot(v) + promote<T>(w.ptilde_alpha).dot(mpt.G) - mpt.ltilde;
  };
  Vector qy(2 * n);
  qy << w.q, w.y;
  const Vector dH = numdiff::gradient(h_of_qy, qy, cfg);
  const Vector dp = -dH.head(n);
  const Vector dptilde = -dH.tail(n);
  const Vector dptilde_alpha = dptilde.tail(k);
  const Vector target = dptilde.head(m);

  const RegularityReport rep = regularity(rp, w);
  if (!rep.symplectic) {
    std::ostringstream os;
    os << "regularity matrix R is singular (det R = " << rep.det << ")";
    throw RegularityFailure(os.str(), rep.det);
  }

  // ptilde_a = g_a(q, y, ydot^a, ptilde_alpha) holds along the flow, so
  // R yddot = dptilde_a/dt - (dg_a along (dq, dy, dptilde_alpha)).
  auto g_of = [&](const auto& z) {
    using T = detail::scalar_of<decltype(z)>;
    return constraint_momentum(rp, Vec<T>(z.head(n)), Vec<T>(z.segment(n, n)), promote<T>(w.ydot_a),
                               Vec<T>(z.tail(k)));
  };
  Vector base(2 * n + k), dir(2 * n + k);
  base << w.q, w.y, w.ptilde_alpha;
  dir << dq, dy, dptilde_alpha;
  const Vector dg = numdiff::directional(g_of, base, dir, cfg);
  const Vector yddot = SmallLu<double>(rep.R).solve(Vector(target - dg));

  W1Field out;
  out.rate = W1State<double>{dq, dy, yddot, dp, dptilde_alpha};
  out.ptilde_a_rate = target;
  return out;
}

Matrix lift_differential(const ReducedProblem& rp, const W1State<double>& w) {
  check_sizes(rp, w);
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  auto lift_fn = [&](const auto& v) {
    using T = detail::scalar_of<decltype(v)>;
    return pack(lift_to_w1(rp, unpack_w1(Vec<T>(v), n, m)));
  };
  return numdiff::jacobian(lift_fn, pack(w), rp.sys.diff());
}

Vector lifted_field(const ReducedProblem& rp, const W1State<double>& w) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  const int k = n - m;
  const W1Field f = w1_vector_field(rp, w);
  auto g_of = [&](const auto& z) {
    using T = detail::scalar_of<decltype(z)>;
    return constraint_momentum(rp, Vec<T>(z.head(n)), Vec<T>(z.segment(n, n)), Vec<T>(z.segment(2 * n, m)),
                               Vec<T>(z.tail(k)));
  };
  Vector base(2 * n + m + k), dir(2 * n + m + k);
  base << w.q, w.y, w.ydot_a, w.ptilde_alpha;
  dir << f.rate.q, f.rate.y, f.rate.ydot_a, f.rate.ptilde_alpha;
  const Vector dptilde_a = numdiff::directional(g_of, base, dir, rp.sys.diff());

  Vector out(4 * n + m);
  out << f.rate.q, f.rate.y, f.rate.ydot_a, f.rate.p, dptilde_a, f.rate.ptilde_alpha;
  return out;
}

double presymplectic_residual(const ReducedProblem& rp, const W1State<double>& w, const Matrix& directions) {
  const int n = rp.sys.n();
  const int m = rp.sys.m();
  const Vector xfield = lifted_field(rp, w);
  const Matrix L = lift_differential(rp, w);
  const Matrix V = directions.size() == 0 ? L : Matrix(L * directions);
  const Vector w0 = pack(lift_to_w1(rp, w));
  auto h_fn = [&](const auto& v) {
    using T = detail::scalar_of<decltype(v)>;
    return hamiltonian(rp, unpack_w0(Vec<T>(v), n, m));
  };
  const Vector dH = numdiff::gradient(h_fn, w0, rp.sys.diff());
  const Matrix omega = presymplectic_form(n, m);
  const Vector lhs = V.transpose() * (omega.transpose() * xfield);
  const Vector rhs = V.transpose() * dH;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace quasiopt
