#include "bellvis/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <vector>

#include "bellvis/dense.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/implicit_lp.hpp"
#include "bellvis/mps.hpp"
#include "bellvis/rng.hpp"

namespace bellvis {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kVerifySalt = 0x76657266ull;
constexpr std::uint64_t kBenchSalt = 0x626e6368ull;

std::optional<Clock::time_point> deadline_from(const RunConfig& cfg) {
  if (cfg.timeout_seconds <= 0) return std::nullopt;
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(cfg.timeout_seconds));
}

bool past(const std::optional<Clock::time_point>& deadline) {
  return deadline && Clock::now() > *deadline;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

AngleVector resolve_angles(const RunConfig& cfg) {
  if (cfg.angle_mode == AngleMode::Explicit) {
    if (!cfg.angles) throw ConfigError("angles.kind=explicit but no values were parsed");
    return *cfg.angles;
  }
  return AngleVector::random(cfg.experiment, cfg.seed);
}

PureState make_state(const RunConfig& cfg, int observers) {
  switch (cfg.state_kind) {
    case StateKind::Ghz:
      return make_ghz(observers);
    case StateKind::File: {
      PureState state = load_state_file(cfg.state_path);
      if (state.observers() != observers) {
        throw ConfigError("state file observer count does not match the experiment");
      }
      return state;
    }
    case StateKind::UniformDebug:
      break;
  }
  throw ConfigError("uniform-debug state has no amplitudes; handled by the table builder");
}

ProbabilityTable make_table(const RunConfig& cfg, const ExperimentConfig& experiment,
                            const AngleVector& angles) {
  if (cfg.state_kind == StateKind::UniformDebug) {
    return ProbabilityTable::uniform(experiment, TableMode::Reduced);
  }
  const PureState state = make_state(cfg, experiment.observers());
  return probability_table(state, experiment, angles, TableMode::Reduced);
}

const char* ipm_status_name(IpmStatus status) {
  switch (status) {
    case IpmStatus::Optimal: return "optimal";
    case IpmStatus::IterationLimit: return "iteration-limit";
    case IpmStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

const char* simplex_status_name(reference::SimplexStatus status) {
  switch (status) {
    case reference::SimplexStatus::Optimal: return "optimal";
    case reference::SimplexStatus::Infeasible: return "infeasible";
    case reference::SimplexStatus::Unbounded: return "unbounded";
    case reference::SimplexStatus::CyclingAbort: return "cycling-abort";
  }
  return "unknown";
}

json angles_json(const AngleVector& angles) {
  json values = json::array();
  for (const auto& per_observer : angles.settings()) {
    json row = json::array();
    for (const auto& s : per_observer) row.push_back({s.theta(), s.phi()});
    values.push_back(std::move(row));
  }
  return values;
}

struct SingleSolve {
  double objective = 0.0;
  std::string status;
  bool optimal = false;
  bool timed_out = false;
  long iterations = 0;
  long cg_iterations = 0;
  double final_gap = 0.0;
};

SingleSolve solve_one(const ImplicitLp& lp, SolverChoice choice, const RunConfig& cfg,
                      const std::optional<Clock::time_point>& deadline,
                      std::ostream* ipm_trace = nullptr) {
  SingleSolve out;
  if (choice == SolverChoice::Ipm) {
    IpmSettings settings = cfg.ipm;
    settings.deadline = deadline;
    settings.trace = ipm_trace;
    const IpmResult result = ipm_solve(lp, settings);
    out.objective = result.objective;
    out.status = ipm_status_name(result.status);
    out.optimal = result.status == IpmStatus::Optimal;
    out.timed_out = result.deadline_exceeded;
    out.iterations = result.ipm_iterations;
    out.cg_iterations = result.total_cg_iterations;
    out.final_gap = result.final_gap;
    return out;
  }
  const reference::DenseLp dense = reference::materialize_dense(lp);
  reference::SimplexSettings settings = cfg.simplex;
  settings.deadline = deadline;
  const reference::SimplexResult result = reference::simplex_solve(dense, settings);
  out.objective = result.objective;
  out.status = simplex_status_name(result.status);
  out.optimal = result.status == reference::SimplexStatus::Optimal;
  out.timed_out = result.deadline_exceeded;
  out.iterations = result.iterations;
  return out;
}

}  // namespace

SolverChoice resolve_solver(SolverMode mode, std::size_t reduced_rows) {
  switch (mode) {
    case SolverMode::Ipm: return SolverChoice::Ipm;
    case SolverMode::Simplex: return SolverChoice::Simplex;
    case SolverMode::Auto: break;
  }
  // Size crossover: the dense oracle wins below ~3^6 rows, the matrix-free
  // solver above it.
  return reduced_rows <= 729 ? SolverChoice::Simplex : SolverChoice::Ipm;
}

json cmd_solve_lp(const RunConfig& cfg) {
  const auto deadline = deadline_from(cfg);
  const auto start = Clock::now();
  const AngleVector angles = resolve_angles(cfg);
  const ProbabilityTable table = make_table(cfg, cfg.experiment, angles);
  const ImplicitLp lp = build_lp(cfg.experiment, table);
  const SolverChoice choice = resolve_solver(cfg.solver, lp.rows());

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!cfg.trace_path.empty() && choice == SolverChoice::Ipm) {
    trace_file.open(cfg.trace_path);
    if (!trace_file) throw IoError("cannot open trace file: " + cfg.trace_path);
    trace = &trace_file;
  }

  const SingleSolve solve = solve_one(lp, choice, cfg, deadline, trace);

  json report;
  report["command"] = "solve-lp";
  report["config"] = resolved_config_json(cfg);
  report["angles"] = angles_json(angles);
  report["rows"] = lp.rows();
  report["cols"] = lp.cols();
  report["solver"] = choice == SolverChoice::Ipm ? "ipm" : "simplex";
  report["objective"] = solve.objective;
  report["status"] = solve.status;
  report["iterations"] = solve.iterations;
  if (choice == SolverChoice::Ipm) {
    report["cg_iterations"] = solve.cg_iterations;
    report["final_gap"] = solve.final_gap;
  }
  report["wall_seconds"] = seconds_since(start);
  report["ok"] = solve.optimal;
  report["timed_out"] = solve.timed_out;
  return report;
}

json cmd_minimize(const RunConfig& cfg) {
  const auto deadline = deadline_from(cfg);
  const auto start = Clock::now();
  const SolverChoice choice = resolve_solver(cfg.solver, cfg.experiment.reduced_row_count());

  IpmSettings ipm = cfg.ipm;
  ipm.deadline = deadline;
  reference::SimplexSettings simplex = cfg.simplex;
  simplex.deadline = deadline;

  DsmObjective objective;
  if (cfg.state_kind == StateKind::UniformDebug) {
    const ExperimentConfig experiment = cfg.experiment;
    objective = [experiment, choice, &cfg, deadline](std::span<const double>) {
      const ProbabilityTable table = ProbabilityTable::uniform(experiment, TableMode::Reduced);
      const ImplicitLp lp = build_lp(experiment, table);
      SingleSolve solve = solve_one(lp, choice, cfg, deadline);
      if (!solve.optimal) throw NumericalError("solver failed on the uniform table");
      return solve.objective;
    };
  } else {
    auto state = std::make_shared<const PureState>(make_state(cfg, cfg.experiment.observers()));
    objective = critical_visibility_objective(std::move(state), cfg.experiment, choice, ipm,
                                              simplex);
  }

  DsmSettings dsm = cfg.dsm;
  dsm.deadline = deadline;
  std::ofstream trace_file;
  if (!cfg.trace_path.empty()) {
    trace_file.open(cfg.trace_path);
    if (!trace_file) throw IoError("cannot open trace file: " + cfg.trace_path);
    dsm.trace = &trace_file;
  }

  const DsmResult result = dsm_minimize(objective, cfg.experiment, dsm);

  json report;
  report["command"] = "minimize";
  report["config"] = resolved_config_json(cfg);
  report["solver"] = choice == SolverChoice::Ipm ? "ipm" : "simplex";
  report["best_value"] = result.best_value;
  report["best_angles"] = angles_json(result.best_angles);
  report["evaluations"] = result.evaluations;
  report["converged"] = result.converged;
  json restarts = json::array();
  for (std::size_t r = 0; r < result.per_restart_values.size(); ++r) {
    const double value = result.per_restart_values[r];
    restarts.push_back({{"restart", r},
                        {"value", std::isfinite(value) ? json(value) : json(nullptr)},
                        {"lp_solves", result.per_restart_evaluations[r]},
                        {"seconds", result.per_restart_seconds[r]}});
  }
  report["restarts"] = std::move(restarts);
  report["wall_seconds"] = seconds_since(start);
  report["ok"] = true;
  report["timed_out"] = result.deadline_exceeded;
  return report;
}

json cmd_verify(const RunConfig& cfg) {
  const auto deadline = deadline_from(cfg);
  const auto start = Clock::now();
  const int samples = cfg.verify_samples;

  struct Sample {
    bool done = false;
    double ipm = 0.0;
    double simplex = 0.0;
    std::string error;
  };
  std::vector<Sample> results(samples);
  std::atomic<int> next{0};
  std::atomic<bool> hit_deadline{false};

  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= samples) return;
      if (past(deadline)) {
        hit_deadline.store(true);
        return;
      }
      Sample& slot = results[i];
      try {
        const AngleVector angles =
            AngleVector::random(cfg.experiment, mix_seed(cfg.seed, kVerifySalt + i));
        const ProbabilityTable table = make_table(cfg, cfg.experiment, angles);
        const ImplicitLp lp = build_lp(cfg.experiment, table);

        SingleSolve ipm = solve_one(lp, SolverChoice::Ipm, cfg, deadline);
        SingleSolve simplex = solve_one(lp, SolverChoice::Simplex, cfg, deadline);
        if (ipm.timed_out || simplex.timed_out) {
          hit_deadline.store(true);
          return;
        }
        if (!ipm.optimal) throw NumericalError("ipm: " + ipm.status);
        if (!simplex.optimal) throw NumericalError("simplex: " + simplex.status);
        slot.ipm = ipm.objective;
        slot.simplex = simplex.objective;
        slot.done = true;
      } catch (const std::exception& ex) {
        slot.error = ex.what();
        return;
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(samples));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  for (const Sample& s : results) {
    if (!s.error.empty()) throw NumericalError("verification sample failed: " + s.error);
  }

  double max_diff = 0.0;
  double sum_diff = 0.0;
  int completed = 0;
  json rows = json::array();
  for (int i = 0; i < samples; ++i) {
    const Sample& s = results[i];
    if (!s.done) continue;
    const double diff = std::abs(s.ipm - s.simplex);
    max_diff = std::max(max_diff, diff);
    sum_diff += diff;
    ++completed;
    rows.push_back({{"sample", i}, {"ipm", s.ipm}, {"simplex", s.simplex}, {"abs_diff", diff}});
  }

  json report;
  report["command"] = "verify";
  report["config"] = resolved_config_json(cfg);
  report["samples_requested"] = samples;
  report["samples_completed"] = completed;
  report["max_abs_diff"] = max_diff;
  report["mean_abs_diff"] = completed > 0 ? sum_diff / completed : 0.0;
  report["rows"] = std::move(rows);
  report["wall_seconds"] = seconds_since(start);
  report["timed_out"] = hit_deadline.load() && completed < samples;
  report["ok"] = completed == samples;
  return report;
}

json cmd_export_mps(const RunConfig& cfg, const std::string& path) {
  if (path.empty()) throw ConfigError("export-mps needs an output path");
  const auto start = Clock::now();
  const AngleVector angles = resolve_angles(cfg);
  const ProbabilityTable table = make_table(cfg, cfg.experiment, angles);
  const ImplicitLp lp = build_lp(cfg.experiment, table);
  write_mps(lp, path);

  std::size_t vis_nonzeros = 0;
  for (double v : lp.last_column()) {
    if (v != 0.0) ++vis_nonzeros;
  }
  json report;
  report["command"] = "export-mps";
  report["config"] = resolved_config_json(cfg);
  report["angles"] = angles_json(angles);
  report["path"] = path;
  report["rows"] = lp.rows();
  report["cols"] = lp.cols();
  report["structural_nonzeros"] = lp.rows() * lp.row_nnz() + 1;
  report["visibility_nonzeros"] = vis_nonzeros;
  report["wall_seconds"] = seconds_since(start);
  report["ok"] = true;
  report["timed_out"] = false;
  return report;
}

json cmd_bench(const RunConfig& cfg) {
  if (cfg.state_kind == StateKind::File) {
    throw ConfigError("bench sweeps observer counts; use a ghz or uniform-debug state");
  }
  const auto global_deadline = deadline_from(cfg);
  const auto start = Clock::now();
  bool timed_out = false;

  json rows = json::array();
  for (int n : cfg.bench_ladder) {
    if (past(global_deadline)) {
      timed_out = true;
      break;
    }
    const ExperimentConfig experiment = ExperimentConfig::two_setting_qubits(n);
    const SolverChoice choice = resolve_solver(cfg.solver, experiment.reduced_row_count());
    json row;
    row["n"] = n;
    row["solver"] = choice == SolverChoice::Ipm ? "ipm" : "simplex";

    auto row_deadline = global_deadline;
    if (cfg.bench_row_timeout > 0) {
      const auto local = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                            std::chrono::duration<double>(cfg.bench_row_timeout));
      row_deadline = row_deadline ? std::min(*row_deadline, local) : local;
    }

    const auto row_start = Clock::now();
    try {
      const AngleVector angles =
          AngleVector::random(experiment, mix_seed(cfg.seed, kBenchSalt + n));
      const ProbabilityTable table = make_table(cfg, experiment, angles);
      const ImplicitLp lp = build_lp(experiment, table);
      row["rows"] = lp.rows();
      row["cols"] = lp.cols();
      const SingleSolve solve = solve_one(lp, choice, cfg, row_deadline);
      row["status"] = solve.timed_out ? "timeout" : solve.status;
      row["objective"] = solve.timed_out ? json(nullptr) : json(solve.objective);
    } catch (const std::exception& ex) {
      row["rows"] = experiment.reduced_row_count();
      row["cols"] = experiment.assignment_count() + 1;
      row["status"] = std::string("error: ") + ex.what();
      row["objective"] = nullptr;
    }
    row["wall_seconds"] = seconds_since(row_start);
    rows.push_back(std::move(row));
  }

  json report;
  report["command"] = "bench";
  report["config"] = resolved_config_json(cfg);
  report["rows"] = std::move(rows);
  report["wall_seconds"] = seconds_since(start);
  report["ok"] = true;
  report["timed_out"] = timed_out;
  return report;
}

namespace {

void write_json_file(const json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << report.dump(2) << '\n';
}

std::string bench_csv(const json& report) {
  std::ostringstream csv;
  csv << "# config: " << report.at("config").dump() << '\n';
  csv << "n,rows,cols,solver,status,objective,wall_seconds\n";
  for (const json& row : report.at("rows")) {
    csv << row.at("n").get<int>() << ',' << row.at("rows").get<std::size_t>() << ','
        << row.at("cols").get<std::size_t>() << ',' << row.at("solver").get<std::string>() << ','
        << row.at("status").get<std::string>() << ',';
    if (row.at("objective").is_null()) {
      csv << "";
    } else {
      csv << std::setprecision(10) << row.at("objective").get<double>();
    }
    csv << ',' << row.at("wall_seconds").get<double>() << '\n';
  }
  return csv.str();
}

void print_human(Command cmd, const json& report, std::ostream& out) {
  switch (cmd) {
    case Command::SolveLp:
      out << "critical visibility: " << std::setprecision(6) << std::fixed
          << report.at("objective").get<double>() << '\n'
          << std::defaultfloat << "solver: " << report.at("solver").get<std::string>() << " ("
          << report.at("status").get<std::string>() << "), " << report.at("rows").get<std::size_t>()
          << " rows x " << report.at("cols").get<std::size_t>() << " cols, "
          << report.at("iterations").get<long>() << " iterations, "
          << std::setprecision(3) << report.at("wall_seconds").get<double>() << "s\n";
      break;
    case Command::Minimize: {
      out << "restart  value      lp_solves  seconds\n";
      for (const json& r : report.at("restarts")) {
        out << std::setw(7) << r.at("restart").get<int>() << "  ";
        if (r.at("value").is_null()) {
          out << std::setw(9) << "failed";
        } else {
          out << std::setprecision(6) << std::fixed << r.at("value").get<double>()
              << std::defaultfloat;
        }
        out << "  " << std::setw(9) << r.at("lp_solves").get<long>() << "  "
            << std::setprecision(3) << r.at("seconds").get<double>() << '\n';
      }
      out << "minimal critical visibility: " << std::setprecision(6) << std::fixed
          << report.at("best_value").get<double>() << std::defaultfloat << " ("
          << report.at("evaluations").get<long>() << " LP solves, "
          << std::setprecision(3) << report.at("wall_seconds").get<double>() << "s)\n";
      break;
    }
    case Command::Verify:
      out << "samples: " << report.at("samples_completed").get<int>() << "/"
          << report.at("samples_requested").get<int>() << '\n'
          << std::setprecision(8) << "max |ipm - simplex|:  " << report.at("max_abs_diff").get<double>()
          << '\n'
          << "mean |ipm - simplex|: " << report.at("mean_abs_diff").get<double>() << '\n'
          << std::setprecision(3) << "wall: " << report.at("wall_seconds").get<double>() << "s\n";
      break;
    case Command::ExportMps:
      out << "wrote " << report.at("path").get<std::string>() << " ("
          << report.at("rows").get<std::size_t>() << " rows, "
          << report.at("cols").get<std::size_t>() << " columns, "
          << report.at("structural_nonzeros").get<std::size_t>() << " structural nonzeros)\n";
      break;
    case Command::Bench:
      out << bench_csv(report);
      break;
  }
}

}  // namespace

int run_command(Command cmd, const RunConfig& cfg, const std::string& export_path,
                std::ostream& out) {
  try {
    json report;
    switch (cmd) {
      case Command::SolveLp: report = cmd_solve_lp(cfg); break;
      case Command::Minimize: report = cmd_minimize(cfg); break;
      case Command::Verify: report = cmd_verify(cfg); break;
      case Command::ExportMps: report = cmd_export_mps(cfg, export_path); break;
      case Command::Bench: report = cmd_bench(cfg); break;
    }
    print_human(cmd, report, out);
    if (!cfg.out_path.empty()) {
      if (cmd == Command::Bench) {
        std::ofstream file(cfg.out_path);
        if (!file) throw IoError("cannot open output file: " + cfg.out_path);
        file << bench_csv(report);
      } else {
        write_json_file(report, cfg.out_path);
      }
    }
    if (report.value("timed_out", false)) {
      out << "timed out\n";
      return kExitTimeout;
    }
    if (!report.value("ok", true)) return kExitSolverError;
    return kExitOk;
  } catch (const ConfigError& ex) {
    out << "config error: " << ex.what() << '\n';
    return kExitConfigError;
  } catch (const ShapeError& ex) {
    out << "config error: " << ex.what() << '\n';
    return kExitConfigError;
  } catch (const SizeCapError& ex) {
    out << "config error: " << ex.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& ex) {
    out << "error: " << ex.what() << '\n';
    return kExitSolverError;
  }
}

}  // namespace bellvis
