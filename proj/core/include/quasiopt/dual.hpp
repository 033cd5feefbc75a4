#pragma once
/// @file dual.hpp
/// @brief Forward-mode dual numbers that nest (Dual<Dual<double>> etc.).

#include <cmath>
#include <type_traits>

#include <Eigen/Core>

namespace quasiopt {

/// A first-order dual number v + d·ε with ε² = 0. The component type may
/// itself be a Dual, which gives mixed higher derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
  template <class U>
    requires std::is_arithmetic_v<U>
  constexpr Dual(U x) : v(T(x)), d(T(0)) {}
  // Embedding of a shallower dual: its tangents stay on the innermost levels.
  template <class U>
    requires(!std::is_arithmetic_v<U> && !std::is_same_v<U, Dual>)
  constexpr explicit Dual(const U& value) : v(T(value)), d(T(0)) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1) / o.v;
    v *= inv;
    d = (d - v * o.d) * inv;
    return *this;
  }
};

/// Nesting depth: 0 for arithmetic types, 1 + depth of the component otherwise.
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};
template <class T>
inline constexpr int dual_depth_v = dual_depth<T>::value;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

/// Strips every dual layer and returns the primal value.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

/// True if every component at every nesting level is finite.
inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) { return all_finite(x.v) && all_finite(x.d); }

// Arithmetic. Mixed operations with plain doubles are provided at every level.

template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  const T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) {
  const T q = a / b.v;
  return {q, -q * b.d / b.v};
}

// Comparisons act on the primal value only.
template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T> bool operator<=(const Dual<T>& a, const Dual<T>& b) { return value_of(a) <= value_of(b); }
template <class T> bool operator>=(const Dual<T>& a, const Dual<T>& b) { return value_of(a) >= value_of(b); }
template <class T> bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.v == b.v && a.d == b.d; }
template <class T> bool operator!=(const Dual<T>& a, const Dual<T>& b) { return !(a == b); }
template <class T> bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }
template <class T> bool operator<(double a, const Dual<T>& b) { return a < value_of(b); }
template <class T> bool operator>(double a, const Dual<T>& b) { return a > value_of(b); }

// Elementary functions, found by ADL from generic code that does `using std::sin;`.

template <class T> Dual<T> sin(const Dual<T>& a) { using std::sin; using std::cos; return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { using std::sin; using std::cos; return {cos(a.v), -(a.d * sin(a.v))}; }
template <class T> Dual<T> tan(const Dual<T>& a) {
  using std::tan;
  const T t = tan(a.v);
  return {t, a.d * (T(1) + t * t)};
}
template <class T> Dual<T> exp(const Dual<T>& a) { using std::exp; const T e = exp(a.v); return {e, a.d * e}; }
template <class T> Dual<T> log(const Dual<T>& a) { using std::log; return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.v, p), a.d * (p * pow(a.v, p - 1.0))};
}
template <class T> Dual<T> abs(const Dual<T>& a) { return value_of(a) < 0.0 ? -a : a; }
template <class T> Dual<T> fabs(const Dual<T>& a) { return abs(a); }
template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  using std::atan2;
  const T r2 = x.v * x.v + y.v * y.v;
  return {atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}
template <class T> Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  return {t, a.d * (T(1) - t * t)};
}
template <class T> bool isfinite(const Dual<T>& a) { return all_finite(a); }

}  // namespace quasiopt

namespace Eigen {

template <class T>
struct NumTraits<quasiopt::Dual<T>> : NumTraits<double> {
  using Real = quasiopt::Dual<T>;
  using NonInteger = quasiopt::Dual<T>;
  using Nested = quasiopt::Dual<T>;
  using Literal = quasiopt::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost
  };
};

template <class T, class BinaryOp>
struct ScalarBinaryOpTraits<quasiopt::Dual<T>, double, BinaryOp> {
  using ReturnType = quasiopt::Dual<T>;
};
template <class T, class BinaryOp>
struct ScalarBinaryOpTraits<double, quasiopt::Dual<T>, BinaryOp> {
  using ReturnType = quasiopt::Dual<T>;
};

}  // namespace Eigen
