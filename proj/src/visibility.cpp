#include "bellvis/visibility.hpp"

#include <cmath>

#include "bellvis/dense.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/implicit_lp.hpp"

namespace bellvis {

namespace {

// A stalled interior point run is still a usable value when the duality gap
// closed most of the way; iterates this tight sit within the tolerance the
// downstream consumers (minimization, oracle comparison) budget for.
constexpr double kMaxUsableGap = 0.05;

}  // namespace

double critical_visibility(const PureState& state, const ExperimentConfig& config,
                           const AngleVector& angles, SolverChoice choice,
                           const IpmSettings& ipm_settings,
                           const reference::SimplexSettings& simplex_settings) {
  const ProbabilityTable table = probability_table(state, config, angles, TableMode::Reduced);
  const ImplicitLp lp = build_lp(config, table);
  if (choice == SolverChoice::Ipm) {
    const IpmResult result = ipm_solve(lp, ipm_settings);
    if (result.status != IpmStatus::Optimal) {
      if (result.deadline_exceeded) throw NumericalError("interior point solve hit the deadline");
      const bool usable = result.ipm_iterations > 0 && std::isfinite(result.objective) &&
                          result.final_gap <= kMaxUsableGap;
      if (!usable) throw NumericalError("interior point solve did not converge");
    }
    return result.objective;
  }
  const reference::DenseLp dense = reference::materialize_dense(lp);
  const reference::SimplexResult result = reference::simplex_solve(dense, simplex_settings);
  if (result.status != reference::SimplexStatus::Optimal) {
    if (result.deadline_exceeded) throw NumericalError("simplex solve hit the deadline");
    throw NumericalError("simplex solve did not reach an optimum");
  }
  return result.objective;
}

DsmObjective critical_visibility_objective(std::shared_ptr<const PureState> state,
                                           const ExperimentConfig& config, SolverChoice choice,
                                           const IpmSettings& ipm_settings,
                                           const reference::SimplexSettings& simplex_settings) {
  if (!state) throw ConfigError("null state");
  if (state->observers() != config.observers()) throw ShapeError("state/config observer mismatch");
  return [state = std::move(state), config, choice, ipm_settings,
          simplex_settings](std::span<const double> flat) {
    const AngleVector angles = AngleVector::from_flat(config, flat);
    return critical_visibility(*state, config, angles, choice, ipm_settings, simplex_settings);
  };
}

}  // namespace bellvis
