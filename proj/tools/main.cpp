#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bellvis/commands.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/run_config.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;
  std::optional<int> rank;
  std::optional<double> ftol;
  std::optional<double> obj_scale;
  std::optional<std::string> out;
  std::optional<std::string> trace;
  std::optional<double> timeout;
  std::vector<std::string> sets;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "master random seed");
  cmd->add_option("--solver", flags.solver, "ipm, simplex, or auto")
      ->check(CLI::IsMember({"ipm", "simplex", "auto"}));
  cmd->add_option("--rank", flags.rank, "partial Cholesky rank (ipm.rank)");
  cmd->add_option("--ftol", flags.ftol, "angle-search convergence tolerance (dsm.ftol)");
  cmd->add_option("--obj-scale", flags.obj_scale, "objective scaling (ipm.objective_scale)");
  cmd->add_option("--out", flags.out, "report file (JSON; CSV for bench)");
  cmd->add_option("--trace", flags.trace, "per-iteration/per-evaluation CSV trace file");
  cmd->add_option("--timeout", flags.timeout, "wall-clock budget in seconds");
  cmd->add_option("--set", flags.sets, "dotted config override, e.g. ipm.epsilon=1e-6")
      ->take_all();
}

bellvis::RunConfig build_config(const Flags& flags) {
  nlohmann::json doc = nlohmann::json::object();
  if (!flags.config_path.empty()) doc = bellvis::load_config_document(flags.config_path);

  // Flag shortcuts are just spellings of config keys; apply them the same way.
  if (flags.seed) bellvis::apply_override(doc, "seed=" + std::to_string(*flags.seed));
  if (flags.solver) bellvis::apply_override(doc, "solver=\"" + *flags.solver + "\"");
  if (flags.rank) bellvis::apply_override(doc, "ipm.rank=" + std::to_string(*flags.rank));
  if (flags.ftol) bellvis::apply_override(doc, "dsm.ftol=" + std::to_string(*flags.ftol));
  if (flags.obj_scale) {
    bellvis::apply_override(doc, "ipm.objective_scale=" + std::to_string(*flags.obj_scale));
  }
  if (flags.out) bellvis::apply_override(doc, "out=\"" + *flags.out + "\"");
  if (flags.trace) bellvis::apply_override(doc, "trace=\"" + *flags.trace + "\"");
  if (flags.timeout) bellvis::apply_override(doc, "timeout=" + std::to_string(*flags.timeout));
  for (const std::string& s : flags.sets) bellvis::apply_override(doc, s);

  return bellvis::parse_run_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical visibility of entangled states via local-model LPs"};
  app.require_subcommand(1);

  Flags flags;
  std::string export_path;
  int samples_override = 0;

  CLI::App* solve = app.add_subcommand("solve-lp", "solve one LP at fixed angles");
  CLI::App* minimize = app.add_subcommand("minimize", "search angles for the minimal value");
  CLI::App* verify = app.add_subcommand("verify", "cross-check ipm against the simplex oracle");
  CLI::App* export_mps = app.add_subcommand("export-mps", "write the LP as a fixed-format MPS file");
  CLI::App* bench = app.add_subcommand("bench", "time solves across a ladder of sizes");
  for (CLI::App* cmd : {solve, minimize, verify, export_mps, bench}) {
    add_common_flags(cmd, flags);
  }
  export_mps->add_option("path", export_path, "destination .mps file")->required();
  verify->add_option("--samples", samples_override, "number of random-angle LPs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : bellvis::kExitConfigError;
  }

  bellvis::Command command;
  if (solve->parsed()) command = bellvis::Command::SolveLp;
  else if (minimize->parsed()) command = bellvis::Command::Minimize;
  else if (verify->parsed()) command = bellvis::Command::Verify;
  else if (export_mps->parsed()) command = bellvis::Command::ExportMps;
  else command = bellvis::Command::Bench;

  bellvis::RunConfig config;
  try {
    config = build_config(flags);
    if (samples_override > 0) config.verify_samples = samples_override;
  } catch (const std::exception& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return bellvis::kExitConfigError;
  }

  return bellvis::run_command(command, config, export_path, std::cout);
}
