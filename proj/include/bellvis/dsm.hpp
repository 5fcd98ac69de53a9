#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "bellvis/experiment.hpp"
#include "bellvis/quantum.hpp"

namespace bellvis {

struct DsmSettings {
  double ftol = 0.01;
  int max_evaluations = 2000;  // per restart
  int restarts = 5;
  std::uint64_t rng_seed = 1;
  double initial_step = 0.5;  // radians added per coordinate to form the simplex
  std::ostream* trace = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct DsmResult {
  double best_value = 0.0;
  AngleVector best_angles;
  long evaluations = 0;  // across all restarts
  bool converged = false;
  bool deadline_exceeded = false;
  std::vector<double> per_restart_values;  // NaN for a restart whose objective failed
  std::vector<long> per_restart_evaluations;
  std::vector<double> per_restart_seconds;
};

// Objective over flattened (theta, phi) angle coordinates. Throwing aborts the
// current restart only; the remaining restarts still run.
using DsmObjective = std::function<double(std::span<const double>)>;

// Downhill simplex search over measurement angles with random restarts.
// Restart r draws its base point from an independent substream of rng_seed,
// so results are reproducible for a fixed seed and restart count.
DsmResult dsm_minimize(const DsmObjective& objective, const ExperimentConfig& config,
                       const DsmSettings& settings = {});

}  // namespace bellvis
