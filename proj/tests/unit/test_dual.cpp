#include <gtest/gtest.h>

#include <cmath>

#include "quasiopt/model.hpp"
#include "test_support.hpp"

using namespace quasiopt;

TEST(Dual, ProductAndQuotientRules) {
  const D1 a(2.0, 1.0), b(3.0, 0.0);
  EXPECT_DOUBLE_EQ((a * b).d, 3.0);
  EXPECT_DOUBLE_EQ((a / b).d, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ((b / a).d, -3.0 / 4.0);
  EXPECT_DOUBLE_EQ((1.0 / a).d, -0.25);
  EXPECT_DOUBLE_EQ((a - 5.0).v, -3.0);
}

TEST(Dual, ElementaryFunctionsMatchClosedForms) {
  qtest::Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = gen.uniform(0.1, 2.0);
    const D1 d(x, 1.0);
    EXPECT_NEAR(sin(d).d, std::cos(x), 1e-15);
    EXPECT_NEAR(cos(d).d, -std::sin(x), 1e-15);
    EXPECT_NEAR(exp(d).d, std::exp(x), 1e-14 * std::exp(x));
    EXPECT_NEAR(log(d).d, 1.0 / x, 1e-14);
    EXPECT_NEAR(sqrt(d).d, 0.5 / std::sqrt(x), 1e-14);
    EXPECT_NEAR(pow(d, 3.5).d, 3.5 * std::pow(x, 2.5), 1e-12);
    EXPECT_NEAR(tan(d).d, 1.0 / (std::cos(x) * std::cos(x)), 1e-11);
    EXPECT_NEAR(tanh(d).d, 1.0 - std::tanh(x) * std::tanh(x), 1e-14);
    const D1 y(0.7, 0.0);
    EXPECT_NEAR(atan2(y, d).d, -0.7 / (x * x + 0.49), 1e-14);
  }
}

TEST(Dual, NestingGivesSecondAndFourthDerivatives) {
  // f = sin(x): f'' = -sin, f'''' = sin.
  const double x = 0.4;
  D2 d2(D1(x, 1.0), D1(1.0, 0.0));
  EXPECT_NEAR(sin(d2).d.d, -std::sin(x), 1e-15);

  D4 z(x);
  z.v.v.v.d = 1.0;
  z.v.v.d.v = 1.0;
  z.v.d.v.v = 1.0;
  z.d.v.v.v = 1.0;
  EXPECT_NEAR(sin(z).d.d.d.d, std::sin(x), 1e-15);
  EXPECT_EQ(dual_depth_v<D4>, 4);
}

TEST(Dual, EmbeddingKeepsInnerTangent) {
  const D1 inner(1.5, 2.0);
  const D3 outer(inner);
  EXPECT_DOUBLE_EQ(outer.v.v.d, 2.0);
  EXPECT_DOUBLE_EQ(outer.d.v.v, 0.0);
  EXPECT_DOUBLE_EQ(value_of(outer), 1.5);
}

TEST(Dual, FiniteAndComparisons) {
  D2 z(1.0);
  EXPECT_TRUE(all_finite(z));
  z.d.d = std::nan("");
  EXPECT_FALSE(all_finite(z));
  EXPECT_TRUE(D1(1.0, 9.0) < D1(2.0, -9.0));
  EXPECT_TRUE(abs(D1(-2.0, 1.0)).d == -1.0);
}

TEST(Dual, EigenMatrixProduct) {
  Mat<D1> A(2, 2);
  A << D1(1, 1), D1(2, 0), D1(0, 0), D1(3, 1);
  Vec<D1> x(2);
  x << D1(1, 0), D1(1, 0);
  const Vec<D1> y = A * x;
  EXPECT_DOUBLE_EQ(y(0).v, 3.0);
  EXPECT_DOUBLE_EQ(y(0).d, 1.0);
  EXPECT_DOUBLE_EQ(y(1).d, 1.0);
  const Vec<D1> z = 2.0 * x;
  EXPECT_DOUBLE_EQ(z(1).v, 2.0);
}
