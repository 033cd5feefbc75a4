#pragma once
/// @file config.hpp
/// @brief Run configuration: a sectioned key = value text format.
///
///   [system]      name, mass, inertia, offset, cost, cost_value, frame_defect, diff
///   [state]       q, y, ydot, p, ptilde          (ptilde holds the n - m unactuated entries)
///   [integrator]  method, dt, rtol, atol, t0, tf, save_every
///   [boundary]    q0, y0, qf, yf, guess, max_iter, residual_tol, fd_step   (solve only)
///   [output]      path, format
///   [run]         command, seed
///
/// Vectors are comma or whitespace separated, optionally bracketed. '#' and ';'
/// start comments.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "quasiopt/flow.hpp"
#include "quasiopt/systems.hpp"

namespace quasiopt::cli {

enum class Command { derive, simulate, solve, check };
enum class OutputFormat { csv, jsonl };

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitNotRegular = 3,
  kExitRegularityFailure = 4,
  kExitNonFinite = 5,
  kExitNoConvergence = 6,
};

struct Position {
  int line = 0;
  int column = 0;
};

/// Parse or validation failure pointing into the config text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(Position pos, const std::string& message);
  Position position() const { return pos_; }
  const std::string& detail() const { return detail_; }

 private:
  Position pos_;
  std::string detail_;
};

struct SystemConfig {
  std::string name = "planar-rigid-body";
  PlanarRigidBodyParams params;
  CostSpec cost;
  bool frame_defect = false;
  /// Empty selects the system default.
  std::optional<DiffScheme> diff;
};

/// Initial W1 state; unset entries fall back to the system defaults.
struct StateConfig {
  std::optional<Vector> q, y, ydot, p, ptilde;
};

struct BoundaryConfig {
  Vector q0, y0, qf, yf;
  Vector guess;
  NewtonSettings newton;
};

struct OutputConfig {
  std::string path;  ///< empty: stdout
  OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
  std::optional<Command> command;
  SystemConfig system;
  StateConfig state;
  IntegratorConfig integrator;
  std::optional<BoundaryConfig> boundary;
  OutputConfig output;
  std::uint64_t seed = 0;

  /// Where each "section.key" was set; used for diagnostics only.
  std::map<std::string, Position> positions;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Normalized text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& cfg);

/// Field-wise equality, ignoring positions.
bool same_config(const RunConfig& a, const RunConfig& b);

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& s);

/// Checks cross-field invariants (boundary present iff solve, dimensions).
void validate(const RunConfig& cfg);

MechanicalSystem build_system(const SystemConfig& cfg);

/// Default state for a system: rigid body at rest pose moving with y = (1, 0, 0),
/// every other entry zero.
W1State<double> initial_state(const RunConfig& cfg, const MechanicalSystem& sys);

}  // namespace quasiopt::cli
