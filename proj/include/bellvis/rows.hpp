#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bellvis/experiment.hpp"

namespace bellvis {

// One marginal-probability constraint: observer j measured observable
// settings_choice[j] (1-based) and obtained outcomes[j].
struct RowId {
  std::vector<int> settings_choice;
  std::vector<int> outcomes;

  bool operator==(const RowId&) const = default;
};

// A row survives reduction unless some observer pairs the last outcome
// (d-1) with an observable index above 1.  Rows dropped this way are linear
// combinations of the surviving ones, so the constraint set is unchanged.
bool is_reduced_row(const ExperimentConfig&, std::span<const int> settings_choice,
                    std::span<const int> outcomes);

// Surviving rows in lexicographic order of (settings choice, outcomes),
// observer 1 most significant in both.  The probability-summation row is
// never emitted; it is implied by the per-settings marginals.
std::vector<RowId> reduced_row_set(const ExperimentConfig&);

// Enumeration form of reduced_row_set for callers that do not want the
// materialized list.  Digit spans stay valid only during the callback.
void for_each_reduced_row(
    const ExperimentConfig&,
    const std::function<void(std::uint32_t settings_code, std::uint32_t outcome_code,
                             std::span<const int> settings_choice,
                             std::span<const int> outcomes)>& fn);

}  // namespace bellvis
