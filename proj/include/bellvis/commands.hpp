#pragma once

#include <ostream>
#include <string>

#include "bellvis/run_config.hpp"
#include "bellvis/visibility.hpp"

namespace bellvis {

enum class Command { SolveLp, Minimize, Verify, ExportMps, Bench };

// Exit codes shared by the CLI and the command runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;
inline constexpr int kExitTimeout = 4;

SolverChoice resolve_solver(SolverMode mode, std::size_t reduced_rows);

// Each command returns its full report (resolved config embedded) and marks
// "timed_out" when the run hit the configured deadline.  Errors propagate as
// the exception types from errors.hpp.
nlohmann::json cmd_solve_lp(const RunConfig&);
nlohmann::json cmd_minimize(const RunConfig&);
nlohmann::json cmd_verify(const RunConfig&);
nlohmann::json cmd_export_mps(const RunConfig&, const std::string& path);
nlohmann::json cmd_bench(const RunConfig&);

// Dispatches, prints a human summary to `out`, writes the report to
// config.out_path when set (JSON; CSV for bench), and maps errors to exit
// codes.  `export_path` is only used by Command::ExportMps.
int run_command(Command, const RunConfig&, const std::string& export_path, std::ostream& out);

}  // namespace bellvis
