#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellvis/dsm.hpp"
#include "bellvis/experiment.hpp"
#include "bellvis/ipm.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/simplex.hpp"

#include "json.hpp"

namespace bellvis {

enum class StateKind { Ghz, File, UniformDebug };
enum class AngleMode { Explicit, Random };
enum class SolverMode { Auto, Ipm, Simplex };

// Everything a command run needs, resolved from the JSON config file plus
// flag overrides.  Validation happens at parse time, before any compute.
struct RunConfig {
  ExperimentConfig experiment = ExperimentConfig::two_setting_qubits(2);
  StateKind state_kind = StateKind::Ghz;
  std::string state_path;

  AngleMode angle_mode = AngleMode::Random;
  std::optional<AngleVector> angles;

  std::uint64_t seed = 1;
  SolverMode solver = SolverMode::Auto;
  IpmSettings ipm;
  reference::SimplexSettings simplex;
  DsmSettings dsm;

  int verify_samples = 100;
  std::vector<int> bench_ladder = {4, 5, 6};
  double bench_row_timeout = 0.0;  // seconds per ladder row; 0 disables

  std::string out_path;    // empty: stdout only
  std::string trace_path;  // empty: no trace written
  double timeout_seconds = 0.0;  // whole-command budget; 0 disables
};

RunConfig parse_run_config(const nlohmann::json& doc);
nlohmann::json load_config_document(const std::string& path);

// Dotted-key override applied to the raw document before parsing,
// e.g. "ipm.rank=150" or "experiment.observers=5".  The value is parsed as
// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Full resolved config for embedding in reports (audit trail).
nlohmann::json resolved_config_json(const RunConfig&);

}  // namespace bellvis
