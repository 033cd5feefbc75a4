#include "quasiopt/model.hpp"

#include <Eigen/SVD>

namespace quasiopt {

double condition_number(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  const Eigen::JacobiSVD<Matrix> svd(a);
  const Vector s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

MechanicalSystem::MechanicalSystem(int n, int m, LagrangianKind kind, std::shared_ptr<const Model> model,
                                   bool has_force, std::string name)
    : n_(n),
      m_(m),
      kind_(kind),
      model_(std::move(model)),
      has_force_(has_force),
      name_(std::move(name)),
      periodic_(static_cast<std::size_t>(n > 0 ? n : 0), false) {
  if (n <= 0) throw InvalidArgument("configuration dimension must be positive");
  if (m <= 0 || m >= n)
    throw InvalidArgument("an underactuated system needs 0 < m < n (got m = " + std::to_string(m) +
                          ", n = " + std::to_string(n) + ")");
  if (!model_) throw InvalidArgument("model must not be null");
  diff_.scheme = model_->generic() ? DiffScheme::dual : DiffScheme::central;
}

void MechanicalSystem::set_diff(const DiffConfig& cfg) {
  if (!(cfg.step > 0.0)) throw InvalidArgument("difference step must be positive");
  if (cfg.scheme == DiffScheme::dual && !model_->generic())
    throw DifferentiationUnavailable("dual-number scheme needs a generic-scalar model");
  diff_ = cfg;
}

void MechanicalSystem::set_periodic(std::vector<bool> flags) {
  if (static_cast<int>(flags.size()) != n_) throw InvalidArgument("periodic flags must have length n");
  periodic_ = std::move(flags);
}

MechanicalSystem make_callback_system(CallbackFunctions fns, int n, int m, LagrangianKind kind,
                                      std::string name) {
  if (!fns.frame || !fns.lagrangian || !fns.cost)
    throw InvalidArgument("callback system needs frame, lagrangian and cost");
  const bool forced = static_cast<bool>(fns.force);
  return MechanicalSystem(n, m, kind, std::make_shared<CallbackModel>(std::move(fns)), forced, std::move(name));
}

}  // namespace quasiopt
