#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "bellvis/dense.hpp"

namespace bellvis::reference {

enum class SimplexStatus { Optimal, Infeasible, Unbounded, CyclingAbort };

struct SimplexSettings {
  double ratio_tol = 1e-9;      // step and pivot tolerance in the ratio test
  double dual_tol = 1e-9;       // reduced-cost optimality tolerance
  int refactor_interval = 100;  // basis pivots between LU refactorizations
  long max_iterations = -1;     // <= 0 picks 100*(m+n)+10000
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SimplexResult {
  double objective = 0.0;
  SimplexStatus status = SimplexStatus::CyclingAbort;
  std::vector<int> basis;  // structural/artificial variable index per row
  long iterations = 0;
  std::vector<double> x;   // structural variable values
  double primal_residual = 0.0;  // max |Ax - b| at the returned point
  bool deadline_exceeded = false;
};

// Bounded-variable revised simplex for maximize c^T x, A x = b, 0 <= x <= u.
// Two phases with artificial variables; Dantzig pricing with a Bland
// fallback once degenerate pivots pile up.
SimplexResult simplex_solve(const DenseLp&, const SimplexSettings& = {});

}  // namespace bellvis::reference
