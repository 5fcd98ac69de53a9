#pragma once

#include <memory>

#include "bellvis/dsm.hpp"
#include "bellvis/ipm.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/simplex.hpp"

namespace bellvis {

enum class SolverChoice { Ipm, Simplex };

// Critical visibility of `state` at one angle assignment: builds the reduced
// LP from the Born probabilities and maximizes the visibility variable.
double critical_visibility(const PureState& state, const ExperimentConfig& config,
                           const AngleVector& angles, SolverChoice choice,
                           const IpmSettings& ipm_settings = {},
                           const reference::SimplexSettings& simplex_settings = {});

// Objective for dsm_minimize: flat angle coordinates in, critical visibility
// out.  Throws NumericalError when the chosen solver does not reach optimal.
DsmObjective critical_visibility_objective(std::shared_ptr<const PureState> state,
                                           const ExperimentConfig& config, SolverChoice choice,
                                           const IpmSettings& ipm_settings = {},
                                           const reference::SimplexSettings& simplex_settings = {});

}  // namespace bellvis
