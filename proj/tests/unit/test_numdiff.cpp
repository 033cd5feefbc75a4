#include <gtest/gtest.h>

#include <cmath>

#include "quasiopt/model.hpp"
#include "test_support.hpp"

using namespace quasiopt;

namespace {

// f(x) = exp(x0) sin(x1) + x0 x2^2
struct Probe {
  template <class V>
  auto operator()(const V& x) const {
    using std::exp;
    using std::sin;
    return exp(x(0)) * sin(x(1)) + x(0) * x(2) * x(2);
  }
};

Vector probe_gradient(const Vector& x) {
  Vector g(3);
  g << std::exp(x(0)) * std::sin(x(1)) + x(2) * x(2), std::exp(x(0)) * std::cos(x(1)), 2.0 * x(0) * x(2);
  return g;
}

Matrix probe_hessian(const Vector& x) {
  Matrix h(3, 3);
  const double e = std::exp(x(0)), s = std::sin(x(1)), c = std::cos(x(1));
  h << e * s, e * c, 2 * x(2), e * c, -e * s, 0, 2 * x(2), 0, 2 * x(0);
  return h;
}

DiffConfig scheme(DiffScheme s) {
  DiffConfig c;
  c.scheme = s;
  return c;
}

}  // namespace

TEST(NumDiff, GradientBothSchemes) {
  qtest::Gen gen(3);
  for (int t = 0; t < 20; ++t) {
    const Vector x = gen.vec(3, 0.8);
    const Vector ref = probe_gradient(x);
    EXPECT_LE((numdiff::gradient(Probe{}, x, scheme(DiffScheme::dual)) - ref).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((numdiff::gradient(Probe{}, x, scheme(DiffScheme::central)) - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(NumDiff, HessianBothSchemes) {
  qtest::Gen gen(4);
  for (int t = 0; t < 20; ++t) {
    const Vector x = gen.vec(3, 0.8);
    const Matrix ref = probe_hessian(x);
    const Matrix hd = numdiff::hessian(Probe{}, x, scheme(DiffScheme::dual));
    const Matrix hc = numdiff::hessian(Probe{}, x, scheme(DiffScheme::central));
    EXPECT_LE((hd - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((hc - ref).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_EQ(hc, hc.transpose());
  }
}

TEST(NumDiff, JacobianAndDirectional) {
  auto f = [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Vec<T> out(2);
    out << x(0) * x(1), x(1) * x(1) + x(2);
    return out;
  };
  Vector x(3), v(3);
  x << 1.0, 2.0, 3.0;
  v << 0.5, -1.0, 2.0;
  Matrix ref(2, 3);
  ref << 2, 1, 0, 0, 4, 1;
  for (auto s : {DiffScheme::dual, DiffScheme::central}) {
    EXPECT_LE((numdiff::jacobian(f, x, scheme(s)) - ref).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((numdiff::directional(f, x, v, scheme(s)) - ref * v).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(numdiff::directional(f, x, Vector(Vector::Zero(3)), scheme(s)), Vector::Zero(2));
  }
}

TEST(NumDiff, CentralErrorShrinksQuadratically) {
  // Truncation error of central differences is O(h^2): shrinking h by 2 cuts it by ~4.
  Vector x(3);
  x << 0.3, 0.9, -0.4;
  const Vector ref = probe_gradient(x);
  auto err = [&](double h) {
    DiffConfig c = scheme(DiffScheme::central);
    c.step = h;
    return (numdiff::gradient(Probe{}, x, c) - ref).norm();
  };
  const double slope = std::log2(err(2e-3) / err(1e-3));
  EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(NumDiff, NonFiniteIsReported) {
  auto f = [](const auto& x) {
    using std::log;
    return log(x(0));
  };
  Vector x(1);
  x << -1.0;
  try {
    (void)numdiff::gradient(f, x, scheme(DiffScheme::dual));
    FAIL() << "expected NonFiniteEvaluation";
  } catch (const NonFiniteEvaluation& e) {
    ASSERT_EQ(e.input().size(), 1u);
    EXPECT_DOUBLE_EQ(e.input()[0], -1.0);
  }
}

TEST(NumDiff, DepthLimitThrows) {
  auto square = [](const auto& x) { return x(0) * x(0); };
  Vec<D3> x(1);
  x(0) = D3(1.0);
  EXPECT_THROW((void)numdiff::hessian(square, x, scheme(DiffScheme::dual)), DifferentiationUnavailable);
  Vec<D2> y(1);
  y(0) = D2(1.0);
  EXPECT_NO_THROW((void)numdiff::hessian(square, y, scheme(DiffScheme::dual)));
}
