#pragma once
/// @file model.hpp
/// @brief MechanicalSystem: configuration dimension, actuated count, Lagrangian,
/// frame of vector fields, external force and running cost.
///
/// User callbacks are type-erased behind a Model that can be evaluated at every
/// scalar of the dual tower (double, Dual<double>, ... up to kMaxDualDepth
/// levels). Systems written as templates get exact derivatives through nested
/// dual numbers; systems given as plain double callbacks fall back to central
/// differences.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "quasiopt/dual.hpp"
#include "quasiopt/errors.hpp"
#include "quasiopt/linalg.hpp"
#include "quasiopt/numdiff.hpp"

namespace quasiopt {

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;
static_assert(dual_depth_v<D4> == kMaxDualDepth);

/// Whether the supplied Lagrangian is L(q, v) on velocities or the reduced
/// l(q, y) on quasivelocities.
enum class LagrangianKind { velocity, quasivelocity };

/// Model evaluation at one scalar type.
template <class S>
class ScalarModel {
 public:
  virtual ~ScalarModel() = default;
  /// n x n matrix whose column B holds the components X_B^A(q).
  virtual Mat<S> frame(const Vec<S>& q) const = 0;
  /// L(q, v) or l(q, y), depending on the system's LagrangianKind.
  virtual S lagrangian(const Vec<S>& q, const Vec<S>& w) const = 0;
  /// External force covector F_A(q, v).
  virtual Vec<S> force(const Vec<S>& q, const Vec<S>& v) const = 0;
  /// Running cost C(q, y, u).
  virtual S cost(const Vec<S>& q, const Vec<S>& y, const Vec<S>& u) const = 0;
};

class Model : public ScalarModel<double>,
              public ScalarModel<D1>,
              public ScalarModel<D2>,
              public ScalarModel<D3>,
              public ScalarModel<D4> {
 public:
  /// True if every level of the dual tower is implemented.
  virtual bool generic() const = 0;

  template <class S>
  const ScalarModel<S>& at() const {
    static_assert(dual_depth_v<S> <= kMaxDualDepth, "scalar outside the model tower");
    return *this;
  }
};

namespace detail {

template <class Impl, class S>
concept HasForce = requires(const Impl& impl, const Vec<S>& q) {
  { impl.template force<S>(q, q) } -> std::convertible_to<Vec<S>>;
};

template <class Derived, class S, class Base>
class GenericLevel : public Base {
 public:
  Mat<S> frame(const Vec<S>& q) const override { return self().impl().template frame<S>(q); }
  S lagrangian(const Vec<S>& q, const Vec<S>& w) const override {
    return self().impl().template lagrangian<S>(q, w);
  }
  Vec<S> force(const Vec<S>& q, const Vec<S>& v) const override {
    using Impl = std::decay_t<decltype(self().impl())>;
    if constexpr (HasForce<Impl, S>) return self().impl().template force<S>(q, v);
    else return Vec<S>::Zero(q.size());
  }
  S cost(const Vec<S>& q, const Vec<S>& y, const Vec<S>& u) const override {
    return self().impl().template cost<S>(q, y, u);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

}  // namespace detail

/// Adapts a class with templated frame/lagrangian/cost (and optionally force)
/// members into a Model covering the whole tower.
template <class Impl>
class GenericModel final
    : public detail::GenericLevel<
          GenericModel<Impl>, D4,
          detail::GenericLevel<
              GenericModel<Impl>, D3,
              detail::GenericLevel<
                  GenericModel<Impl>, D2,
                  detail::GenericLevel<GenericModel<Impl>, D1,
                                       detail::GenericLevel<GenericModel<Impl>, double, Model>>>>> {
 public:
  explicit GenericModel(Impl impl) : impl_(std::move(impl)) {}
  bool generic() const override { return true; }
  const Impl& impl() const { return impl_; }

 private:
  Impl impl_;
};

/// Plain double callbacks. Only the double level is available, so systems built
/// from these must use the central-difference scheme.
struct CallbackFunctions {
  std::function<Matrix(const Vector&)> frame;
  std::function<double(const Vector&, const Vector&)> lagrangian;
  std::function<Vector(const Vector&, const Vector&)> force;  // may be empty
  std::function<double(const Vector&, const Vector&, const Vector&)> cost;
};

class CallbackModel final : public Model {
 public:
  explicit CallbackModel(CallbackFunctions fns) : fns_(std::move(fns)) {}
  bool generic() const override { return false; }

  Matrix frame(const Vector& q) const override { return fns_.frame(q); }
  double lagrangian(const Vector& q, const Vector& w) const override { return fns_.lagrangian(q, w); }
  Vector force(const Vector& q, const Vector& v) const override {
    return fns_.force ? fns_.force(q, v) : Vector::Zero(q.size());
  }
  double cost(const Vector& q, const Vector& y, const Vector& u) const override {
    return fns_.cost(q, y, u);
  }

#define QUASIOPT_UNAVAILABLE_LEVEL(S)                                                        \
  Mat<S> frame(const Vec<S>&) const override { unavailable(); }                             \
  S lagrangian(const Vec<S>&, const Vec<S>&) const override { unavailable(); }              \
  Vec<S> force(const Vec<S>&, const Vec<S>&) const override { unavailable(); }              \
  S cost(const Vec<S>&, const Vec<S>&, const Vec<S>&) const override { unavailable(); }
  QUASIOPT_UNAVAILABLE_LEVEL(D1)
  QUASIOPT_UNAVAILABLE_LEVEL(D2)
  QUASIOPT_UNAVAILABLE_LEVEL(D3)
  QUASIOPT_UNAVAILABLE_LEVEL(D4)
#undef QUASIOPT_UNAVAILABLE_LEVEL

 private:
  [[noreturn]] static void unavailable() {
    throw DifferentiationUnavailable(
        "callback system supports only double evaluation; use the central-difference scheme");
  }
  CallbackFunctions fns_;
};

class MechanicalSystem {
 public:
  /// Throws InvalidArgument unless 0 < m < n.
  MechanicalSystem(int n, int m, LagrangianKind kind, std::shared_ptr<const Model> model,
                   bool has_force, std::string name = "custom");

  int n() const { return n_; }
  int m() const { return m_; }
  int unactuated() const { return n_ - m_; }
  LagrangianKind lagrangian_kind() const { return kind_; }
  const Model& model() const { return *model_; }
  bool has_force() const { return has_force_; }
  const std::string& name() const { return name_; }

  /// Differentiation settings used by every derived quantity. Defaults to the
  /// dual scheme for generic models and central differences otherwise.
  const DiffConfig& diff() const { return diff_; }
  /// Throws DifferentiationUnavailable when the dual scheme is asked of a callback model.
  void set_diff(const DiffConfig& cfg);

  /// Per-coordinate periodicity (angles), used for output wrapping only.
  const std::vector<bool>& periodic() const { return periodic_; }
  void set_periodic(std::vector<bool> flags);

 private:
  int n_;
  int m_;
  LagrangianKind kind_;
  std::shared_ptr<const Model> model_;
  bool has_force_;
  std::string name_;
  DiffConfig diff_;
  std::vector<bool> periodic_;
};

/// Builds a system from a class with templated members
/// `frame<S>(q)`, `lagrangian<S>(q, w)`, `cost<S>(q, y, u)` and optionally `force<S>(q, v)`.
template <class Impl>
MechanicalSystem make_system(Impl impl, int n, int m, LagrangianKind kind, std::string name) {
  constexpr bool forced = detail::HasForce<Impl, double>;
  return MechanicalSystem(n, m, kind, std::make_shared<GenericModel<Impl>>(std::move(impl)), forced,
                          std::move(name));
}

MechanicalSystem make_callback_system(CallbackFunctions fns, int n, int m, LagrangianKind kind,
                                      std::string name = "callback");

}  // namespace quasiopt
