#include "quasiopt_cli/output.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace quasiopt::cli {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_columns(int n, int m) {
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= n; ++i) cols.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) cols.push_back("y" + std::to_string(i));
  for (int i = 1; i <= m; ++i) cols.push_back("ydot" + std::to_string(i));
  for (int i = 1; i <= n; ++i) cols.push_back("p" + std::to_string(i));
  for (int i = m + 1; i <= n; ++i) cols.push_back("ptilde" + std::to_string(i));
  cols.push_back("H");
  cols.push_back("phi_max");
  for (int i = 1; i <= m; ++i) cols.push_back("u" + std::to_string(i));
  return cols;
}

namespace {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  return r - std::numbers::pi;
}

std::vector<double> row(const TrajectoryLog& log, std::size_t i, const std::vector<bool>& periodic) {
  const W1State<double>& w = log.states[i];
  std::vector<double> r{log.times[i]};
  for (Eigen::Index k = 0; k < w.q.size(); ++k) {
    const bool wrap = static_cast<std::size_t>(k) < periodic.size() && periodic[static_cast<std::size_t>(k)];
    r.push_back(wrap ? wrap_angle(w.q(k)) : w.q(k));
  }
  for (const Vector* v : {&w.y, &w.ydot_a, &w.p, &w.ptilde_alpha})
    for (Eigen::Index k = 0; k < v->size(); ++k) r.push_back((*v)(k));
  r.push_back(log.hamiltonian[i]);
  r.push_back(log.constraint_residual[i]);
  for (Eigen::Index k = 0; k < log.controls[i].size(); ++k) r.push_back(log.controls[i](k));
  return r;
}

}  // namespace

void write_csv(std::ostream& os, const TrajectoryLog& log, const std::vector<bool>& periodic) {
  const auto cols = trajectory_columns(log.n, log.m);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << "\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto r = row(log, i, periodic);
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_double(r[c]);
    os << "\n";
  }
}

void write_jsonl(std::ostream& os, const TrajectoryLog& log, const std::vector<bool>& periodic) {
  const auto cols = trajectory_columns(log.n, log.m);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto r = row(log, i, periodic);
    nlohmann::ordered_json j;
    for (std::size_t c = 0; c < cols.size(); ++c) j[cols[c]] = r[c];
    os << j.dump() << "\n";
  }
}

}  // namespace quasiopt::cli
