#pragma once
/// @file commands.hpp
/// @brief The four workflows. Each returns a process exit code (see ExitCode).

#include <ostream>

#include "quasiopt_cli/config.hpp"

namespace quasiopt::cli {

int cmd_derive(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_check(const RunConfig& cfg, std::ostream& out);

/// Validates cfg, dispatches on cfg.command and maps library errors to exit
/// codes, writing diagnostics to err.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace quasiopt::cli
