#include "bellvis/run_config.hpp"

#include <fstream>

#include "bellvis/errors.hpp"

namespace bellvis {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(std::string("bad value for '") + key + "'");
  }
}

ExperimentConfig parse_experiment(const json& doc) {
  if (!doc.contains("experiment")) return ExperimentConfig::two_setting_qubits(2);
  const json& e = doc.at("experiment");
  check_keys(e, "experiment", {"observers", "outcomes", "observables"});
  const int observers = field(e, "observers", 2);
  const int outcomes = field(e, "outcomes", 2);
  std::vector<int> observables;
  if (!e.contains("observables")) {
    observables.assign(observers > 0 ? observers : 0, 2);
  } else if (e.at("observables").is_number_integer()) {
    observables.assign(observers > 0 ? observers : 0, e.at("observables").get<int>());
  } else {
    observables = field(e, "observables", std::vector<int>{});
  }
  try {
    return ExperimentConfig(observers, outcomes, std::move(observables));
  } catch (const std::exception& ex) {
    fail(std::string("experiment: ") + ex.what());
  }
}

void parse_state(const json& doc, RunConfig& cfg) {
  if (!doc.contains("state")) return;
  const json& s = doc.at("state");
  std::string kind;
  if (s.is_string()) {
    kind = s.get<std::string>();
  } else {
    check_keys(s, "state", {"kind", "path"});
    kind = field<std::string>(s, "kind", "ghz");
    cfg.state_path = field<std::string>(s, "path", "");
  }
  if (kind == "ghz") {
    cfg.state_kind = StateKind::Ghz;
  } else if (kind == "file") {
    cfg.state_kind = StateKind::File;
    if (cfg.state_path.empty()) fail("state.kind=file needs state.path");
    if (!std::ifstream(cfg.state_path)) fail("state file not readable: " + cfg.state_path);
  } else if (kind == "uniform-debug") {
    cfg.state_kind = StateKind::UniformDebug;
  } else {
    fail("state.kind must be ghz, file, or uniform-debug");
  }
}

void parse_angles(const json& doc, RunConfig& cfg) {
  if (!doc.contains("angles")) return;
  const json& a = doc.at("angles");
  check_keys(a, "angles", {"kind", "values"});
  const std::string kind = field<std::string>(a, "kind", "random");
  if (kind == "random") {
    cfg.angle_mode = AngleMode::Random;
    return;
  }
  if (kind != "explicit") fail("angles.kind must be explicit or random");
  cfg.angle_mode = AngleMode::Explicit;
  if (!a.contains("values")) fail("angles.kind=explicit needs angles.values");
  std::vector<std::vector<ObservableSetting>> settings;
  try {
    for (const json& per_observer : a.at("values")) {
      std::vector<ObservableSetting>& row = settings.emplace_back();
      for (const json& pair : per_observer) {
        row.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
    }
    cfg.angles = AngleVector(cfg.experiment, std::move(settings));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    fail(std::string("angles.values: ") + ex.what());
  }
}

void parse_ipm(const json& doc, IpmSettings& ipm) {
  if (!doc.contains("ipm")) return;
  const json& b = doc.at("ipm");
  check_keys(b, "ipm",
             {"epsilon", "eps_cg", "rank", "rank_cap", "cg_initial", "cg_growth", "cg_cap",
              "reg_scale", "reg_floor", "max_iterations", "objective_scale"});
  ipm.epsilon = field(b, "epsilon", ipm.epsilon);
  ipm.eps_cg = field(b, "eps_cg", ipm.eps_cg);
  ipm.chol_rank = field(b, "rank", ipm.chol_rank);
  ipm.chol_rank_cap = field(b, "rank_cap", ipm.chol_rank_cap);
  ipm.cg_schedule.initial = field(b, "cg_initial", ipm.cg_schedule.initial);
  ipm.cg_schedule.growth = field(b, "cg_growth", ipm.cg_schedule.growth);
  ipm.cg_schedule.cap = field(b, "cg_cap", ipm.cg_schedule.cap);
  ipm.reg_scale = field(b, "reg_scale", ipm.reg_scale);
  ipm.reg_floor = field(b, "reg_floor", ipm.reg_floor);
  ipm.max_ipm_iters = field(b, "max_iterations", ipm.max_ipm_iters);
  ipm.objective_scale = field(b, "objective_scale", ipm.objective_scale);
  if (!(ipm.epsilon > 0) || !(ipm.eps_cg > 0)) fail("ipm tolerances must be positive");
  if (ipm.chol_rank < 0) fail("ipm.rank must be non-negative");
  if (ipm.chol_rank_cap < 0) fail("ipm.rank_cap must be non-negative");
  if (ipm.cg_schedule.initial < 1 || ipm.cg_schedule.cap < 1 || !(ipm.cg_schedule.growth >= 1.0)) {
    fail("ipm cg schedule values out of range");
  }
  if (!(ipm.objective_scale > 0)) fail("ipm.objective_scale must be positive");
  if (ipm.max_ipm_iters < 1) fail("ipm.max_iterations must be at least 1");
}

void parse_simplex(const json& doc, reference::SimplexSettings& sx) {
  if (!doc.contains("simplex")) return;
  const json& b = doc.at("simplex");
  check_keys(b, "simplex", {"ratio_tol", "dual_tol", "refactor_interval", "max_iterations"});
  sx.ratio_tol = field(b, "ratio_tol", sx.ratio_tol);
  sx.dual_tol = field(b, "dual_tol", sx.dual_tol);
  sx.refactor_interval = field(b, "refactor_interval", sx.refactor_interval);
  sx.max_iterations = field(b, "max_iterations", sx.max_iterations);
  if (!(sx.ratio_tol > 0) || !(sx.dual_tol > 0)) fail("simplex tolerances must be positive");
  if (sx.refactor_interval < 1) fail("simplex.refactor_interval must be at least 1");
}

void parse_dsm(const json& doc, DsmSettings& dsm) {
  if (!doc.contains("dsm")) return;
  const json& b = doc.at("dsm");
  check_keys(b, "dsm", {"ftol", "max_evaluations", "restarts", "initial_step"});
  dsm.ftol = field(b, "ftol", dsm.ftol);
  dsm.max_evaluations = field(b, "max_evaluations", dsm.max_evaluations);
  dsm.restarts = field(b, "restarts", dsm.restarts);
  dsm.initial_step = field(b, "initial_step", dsm.initial_step);
  if (!(dsm.ftol > 0)) fail("dsm.ftol must be positive");
  if (dsm.max_evaluations < 1) fail("dsm.max_evaluations must be at least 1");
  if (dsm.restarts < 1) fail("dsm.restarts must be at least 1");
  if (!(dsm.initial_step > 0)) fail("dsm.initial_step must be positive");
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) fail("config root must be an object");
  check_keys(doc, "config root",
             {"experiment", "state", "angles", "seed", "solver", "ipm", "simplex", "dsm",
              "verify", "bench", "out", "trace", "timeout"});

  RunConfig cfg;
  cfg.experiment = parse_experiment(doc);
  parse_state(doc, cfg);
  parse_angles(doc, cfg);
  cfg.seed = field<std::uint64_t>(doc, "seed", cfg.seed);

  const std::string solver = field<std::string>(doc, "solver", "auto");
  if (solver == "auto") {
    cfg.solver = SolverMode::Auto;
  } else if (solver == "ipm") {
    cfg.solver = SolverMode::Ipm;
  } else if (solver == "simplex") {
    cfg.solver = SolverMode::Simplex;
  } else {
    fail("solver must be auto, ipm, or simplex");
  }

  parse_ipm(doc, cfg.ipm);
  parse_simplex(doc, cfg.simplex);
  parse_dsm(doc, cfg.dsm);
  cfg.dsm.rng_seed = cfg.seed;

  if (doc.contains("verify")) {
    const json& v = doc.at("verify");
    check_keys(v, "verify", {"samples"});
    cfg.verify_samples = field(v, "samples", cfg.verify_samples);
    if (cfg.verify_samples < 1) fail("verify.samples must be at least 1");
  }
  if (doc.contains("bench")) {
    const json& b = doc.at("bench");
    check_keys(b, "bench", {"ladder", "row_timeout"});
    cfg.bench_ladder = field(b, "ladder", cfg.bench_ladder);
    cfg.bench_row_timeout = field(b, "row_timeout", cfg.bench_row_timeout);
    if (cfg.bench_ladder.empty()) fail("bench.ladder must not be empty");
    for (int n : cfg.bench_ladder) {
      if (n < 2) fail("bench.ladder entries must be at least 2");
    }
    if (cfg.bench_row_timeout < 0) fail("bench.row_timeout must be non-negative");
  }

  cfg.out_path = field<std::string>(doc, "out", "");
  cfg.trace_path = field<std::string>(doc, "trace", "");
  cfg.timeout_seconds = field(doc, "timeout", cfg.timeout_seconds);
  if (cfg.timeout_seconds < 0) fail("timeout must be non-negative");
  return cfg;
}

json load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  return doc;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key.path=value: " + assignment);
  }
  std::string pointer = "/" + assignment.substr(0, eq);
  for (char& c : pointer) {
    if (c == '.') c = '/';
  }
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  try {
    doc[json::json_pointer(pointer)] = std::move(value);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad override '") + assignment + "': " + ex.what());
  }
}

json resolved_config_json(const RunConfig& cfg) {
  json doc;
  doc["experiment"] = {{"observers", cfg.experiment.observers()},
                       {"outcomes", cfg.experiment.outcomes()},
                       {"observables", cfg.experiment.observables()}};
  const char* state_kind = cfg.state_kind == StateKind::Ghz ? "ghz"
                           : cfg.state_kind == StateKind::File ? "file"
                                                               : "uniform-debug";
  doc["state"] = {{"kind", state_kind}};
  if (!cfg.state_path.empty()) doc["state"]["path"] = cfg.state_path;

  doc["angles"]["kind"] = cfg.angle_mode == AngleMode::Explicit ? "explicit" : "random";
  if (cfg.angles) {
    json values = json::array();
    for (const auto& per_observer : cfg.angles->settings()) {
      json row = json::array();
      for (const auto& s : per_observer) row.push_back({s.theta(), s.phi()});
      values.push_back(std::move(row));
    }
    doc["angles"]["values"] = std::move(values);
  }

  doc["seed"] = cfg.seed;
  doc["solver"] = cfg.solver == SolverMode::Auto     ? "auto"
                  : cfg.solver == SolverMode::Ipm    ? "ipm"
                                                     : "simplex";
  doc["ipm"] = {{"epsilon", cfg.ipm.epsilon},
                {"eps_cg", cfg.ipm.eps_cg},
                {"rank", cfg.ipm.chol_rank},
                {"rank_cap", cfg.ipm.chol_rank_cap},
                {"cg_initial", cfg.ipm.cg_schedule.initial},
                {"cg_growth", cfg.ipm.cg_schedule.growth},
                {"cg_cap", cfg.ipm.cg_schedule.cap},
                {"reg_scale", cfg.ipm.reg_scale},
                {"reg_floor", cfg.ipm.reg_floor},
                {"max_iterations", cfg.ipm.max_ipm_iters},
                {"objective_scale", cfg.ipm.objective_scale}};
  doc["simplex"] = {{"ratio_tol", cfg.simplex.ratio_tol},
                    {"dual_tol", cfg.simplex.dual_tol},
                    {"refactor_interval", cfg.simplex.refactor_interval},
                    {"max_iterations", cfg.simplex.max_iterations}};
  doc["dsm"] = {{"ftol", cfg.dsm.ftol},
                {"max_evaluations", cfg.dsm.max_evaluations},
                {"restarts", cfg.dsm.restarts},
                {"initial_step", cfg.dsm.initial_step}};
  doc["verify"] = {{"samples", cfg.verify_samples}};
  doc["bench"] = {{"ladder", cfg.bench_ladder}, {"row_timeout", cfg.bench_row_timeout}};
  if (!cfg.out_path.empty()) doc["out"] = cfg.out_path;
  if (!cfg.trace_path.empty()) doc["trace"] = cfg.trace_path;
  doc["timeout"] = cfg.timeout_seconds;
  return doc;
}

}  // namespace bellvis
