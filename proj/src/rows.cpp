#include "bellvis/rows.hpp"

#include "bellvis/errors.hpp"

namespace bellvis {

bool is_reduced_row(const ExperimentConfig& config, std::span<const int> settings_choice,
                    std::span<const int> outcomes) {
  if (static_cast<int>(settings_choice.size()) != config.observers() ||
      static_cast<int>(outcomes.size()) != config.observers()) {
    throw ShapeError("row tuple length mismatch");
  }
  for (int j = 0; j < config.observers(); ++j) {
    if (settings_choice[j] > 1 && outcomes[j] == config.outcomes() - 1) return false;
  }
  return true;
}

void for_each_reduced_row(
    const ExperimentConfig& config,
    const std::function<void(std::uint32_t, std::uint32_t, std::span<const int>,
                             std::span<const int>)>& fn) {
  const int n = config.observers();
  const int d = config.outcomes();
  std::vector<int> choice(n, 1);
  std::vector<int> outs(n, 0);

  // Outer loop over settings choices, inner over outcome tuples, both in
  // lexicographic order so row indices match the full-formulation layout.
  const std::uint64_t combos = config.setting_combinations();
  for (std::uint64_t oc = 0; oc < combos; ++oc) {
    std::uint64_t c = oc;
    for (int j = n - 1; j >= 0; --j) {
      const std::uint64_t m = static_cast<std::uint64_t>(config.observables_for(j));
      choice[j] = static_cast<int>(c % m) + 1;
      c /= m;
    }
    const std::uint64_t d_pow_n = config.state_dim();
    for (std::uint64_t rc = 0; rc < d_pow_n; ++rc) {
      std::uint64_t r = rc;
      bool keep = true;
      for (int j = n - 1; j >= 0; --j) {
        outs[j] = static_cast<int>(r % static_cast<std::uint64_t>(d));
        r /= static_cast<std::uint64_t>(d);
        if (choice[j] > 1 && outs[j] == d - 1) keep = false;
      }
      if (!keep) continue;
      fn(static_cast<std::uint32_t>(oc), static_cast<std::uint32_t>(rc), choice, outs);
    }
  }
}

std::vector<RowId> reduced_row_set(const ExperimentConfig& config) {
  std::vector<RowId> rows;
  rows.reserve(config.reduced_row_count());
  for_each_reduced_row(config, [&](std::uint32_t, std::uint32_t, std::span<const int> choice,
                                   std::span<const int> outs) {
    rows.push_back(RowId{{choice.begin(), choice.end()}, {outs.begin(), outs.end()}});
  });
  return rows;
}

}  // namespace bellvis
