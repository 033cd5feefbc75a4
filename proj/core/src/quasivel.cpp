#include "quasiopt/quasivel.hpp"

#include <sstream>

namespace quasiopt {

namespace detail {

void throw_singular_frame(double condition) {
  std::ostringstream os;
  os << "frame X(q) is numerically singular (condition ~ " << condition << ")";
  throw SingularFrame(os.str(), condition);
}

}  // namespace detail

FramePoint frame_point(const MechanicalSystem& sys, const Vector& q) {
  FramePoint fp;
  fp.q = q;
  fp.X = frame_at(sys, q);
  fp.condition = condition_number(fp.X);
  if (!(fp.condition <= kSingularFrameCondition)) detail::throw_singular_frame(fp.condition);
  fp.Xinv = SmallLu<double>(fp.X).inverse();
  fp.C = structure_coefficients(sys, q);
  return fp;
}

namespace {

Vector solve_mass(const Matrix& mass, const Vector& rhs) {
  const SmallLu<double> lu(mass);
  const double det = std::abs(lu.determinant());
  if (lu.singular() || !(det > 1e-12 * std::pow(max_abs(mass), static_cast<double>(mass.rows()))))
    throw SingularMassMatrix("y-Hessian of the reduced Lagrangian is singular");
  return lu.solve(rhs);
}

}  // namespace

QuasiRates free_dynamics(const MechanicalSystem& sys, const Vector& q, const Vector& y) {
  const HamelTerms<double> t = hamel_terms(sys, q, y);
  return {quasi_to_velocity(sys, q, y), solve_mass(t.mass, -t.bias)};
}

QuasiRates forced_dynamics(const MechanicalSystem& sys, const Vector& q, const Vector& y, const Vector& u) {
  if (u.size() != sys.m()) throw InvalidArgument("control vector must have length m");
  const HamelTerms<double> t = hamel_terms(sys, q, y);
  Vector tau = Vector::Zero(sys.n());
  tau.head(sys.m()) = u;
  return {quasi_to_velocity(sys, q, y), solve_mass(t.mass, tau - t.bias)};
}

}  // namespace quasiopt
