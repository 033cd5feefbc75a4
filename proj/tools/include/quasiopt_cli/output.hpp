#pragma once
/// @file output.hpp
/// @brief Trajectory tables as CSV or JSON lines.

#include <ostream>
#include <string>
#include <vector>

#include "quasiopt/flow.hpp"

namespace quasiopt::cli {

/// 17 significant digits with a '.' decimal point regardless of locale, so
/// every double round-trips bit for bit.
std::string format_double(double x);

/// t, q1..qn, y1..yn, ydot1..ydotm, p1..pn, ptilde{m+1}..ptilde{n}, H, phi_max, u1..um.
std::vector<std::string> trajectory_columns(int n, int m);

/// One row per logged sample. Coordinates flagged periodic are wrapped to [-pi, pi).
void write_csv(std::ostream& os, const TrajectoryLog& log, const std::vector<bool>& periodic = {});
void write_jsonl(std::ostream& os, const TrajectoryLog& log, const std::vector<bool>& periodic = {});

}  // namespace quasiopt::cli
