#include "quasiopt/reduction.hpp"

namespace quasiopt {

double affinity_defect(const ReducedProblem& rp, const Vector& q, const Vector& y, const Vector& ydot,
                       const Vector& direction, double step) {
  auto phi = [&](const Vector& a) { return constraint_values(rp, SecondOrderPoint<double>{q, y, a}); };
  const Vector second = phi(ydot + step * direction) - 2.0 * phi(ydot) + phi(ydot - step * direction);
  return second.cwiseAbs().maxCoeff() / (step * step);
}

}  // namespace quasiopt
