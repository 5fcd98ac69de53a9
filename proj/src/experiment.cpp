#include "bellvis/experiment.hpp"

#include <limits>
#include <string>

#include "bellvis/errors.hpp"

namespace bellvis {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw ConfigError("experiment size overflows 64-bit arithmetic");
  }
  return a * b;
}

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

}  // namespace

ExperimentConfig::ExperimentConfig(int observers, int outcomes, std::vector<int> observables)
    : observers_(observers), outcomes_(outcomes), observables_(std::move(observables)) {
  if (observers_ < 2) throw ConfigError("need at least 2 observers");
  if (outcomes_ != 2) throw ConfigError("only 2-outcome measurements are supported");
  if (static_cast<int>(observables_.size()) != observers_) {
    throw ConfigError("observables list length must equal observer count, got " +
                      std::to_string(observables_.size()));
  }
  for (int m : observables_) {
    if (m < 1) throw ConfigError("every observer needs at least one observable");
  }
  // Validates that the derived sizes fit in 64 bits.
  assignment_count();
  full_row_count();
}

ExperimentConfig ExperimentConfig::two_setting_qubits(int observers) {
  return ExperimentConfig(observers, 2, std::vector<int>(static_cast<size_t>(observers < 0 ? 0 : observers), 2));
}

int ExperimentConfig::settings_total() const {
  int total = 0;
  for (int m : observables_) total += m;
  return total;
}

std::uint64_t ExperimentConfig::state_dim() const {
  return checked_pow(static_cast<std::uint64_t>(outcomes_), observers_);
}

std::uint64_t ExperimentConfig::setting_combinations() const {
  std::uint64_t r = 1;
  for (int m : observables_) r = checked_mul(r, static_cast<std::uint64_t>(m));
  return r;
}

std::uint64_t ExperimentConfig::assignment_count() const {
  std::uint64_t r = 1;
  for (int m : observables_) r = checked_mul(r, checked_pow(outcomes_, m));
  return r;
}

std::uint64_t ExperimentConfig::full_row_count() const {
  return checked_mul(setting_combinations(), state_dim());
}

std::uint64_t ExperimentConfig::reduced_row_count() const {
  std::uint64_t r = 1;
  const std::uint64_t d = static_cast<std::uint64_t>(outcomes_);
  for (int m : observables_) {
    r = checked_mul(r, d + static_cast<std::uint64_t>(m - 1) * (d - 1));
  }
  return r;
}

std::uint32_t encode_settings_choice(const ExperimentConfig& config, std::span<const int> choice) {
  if (static_cast<int>(choice.size()) != config.observers()) {
    throw ShapeError("settings choice length mismatch");
  }
  std::uint64_t code = 0;
  for (int j = 0; j < config.observers(); ++j) {
    const int m = config.observables_for(j);
    if (choice[j] < 1 || choice[j] > m) throw ShapeError("settings choice out of range");
    code = code * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(choice[j] - 1);
  }
  return static_cast<std::uint32_t>(code);
}

std::vector<int> decode_settings_choice(const ExperimentConfig& config, std::uint32_t code) {
  std::vector<int> choice(config.observers());
  std::uint64_t c = code;
  for (int j = config.observers() - 1; j >= 0; --j) {
    const std::uint64_t m = static_cast<std::uint64_t>(config.observables_for(j));
    choice[j] = static_cast<int>(c % m) + 1;
    c /= m;
  }
  if (c != 0) throw ShapeError("settings code out of range");
  return choice;
}

std::uint32_t encode_outcomes(const ExperimentConfig& config, std::span<const int> outcomes) {
  if (static_cast<int>(outcomes.size()) != config.observers()) {
    throw ShapeError("outcome tuple length mismatch");
  }
  std::uint64_t code = 0;
  for (int j = 0; j < config.observers(); ++j) {
    if (outcomes[j] < 0 || outcomes[j] >= config.outcomes()) {
      throw ShapeError("outcome value out of range");
    }
    code = code * static_cast<std::uint64_t>(config.outcomes()) + static_cast<std::uint64_t>(outcomes[j]);
  }
  return static_cast<std::uint32_t>(code);
}

std::vector<int> decode_outcomes(const ExperimentConfig& config, std::uint32_t code) {
  std::vector<int> outcomes(config.observers());
  std::uint64_t c = code;
  for (int j = config.observers() - 1; j >= 0; --j) {
    outcomes[j] = static_cast<int>(c % config.outcomes());
    c /= static_cast<std::uint64_t>(config.outcomes());
  }
  if (c != 0) throw ShapeError("outcome code out of range");
  return outcomes;
}

}  // namespace bellvis
