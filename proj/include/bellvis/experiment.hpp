#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bellvis {

// Layout of a correlation experiment: `observers` parties, each party j
// choosing between observables[j] measurement settings with `outcomes`
// possible results per measurement.  Only outcomes == 2 is supported.
class ExperimentConfig {
 public:
  ExperimentConfig(int observers, int outcomes, std::vector<int> observables);

  // Every observer measures one of two qubit observables.
  static ExperimentConfig two_setting_qubits(int observers);

  int observers() const { return observers_; }
  int outcomes() const { return outcomes_; }
  const std::vector<int>& observables() const { return observables_; }
  int observables_for(int observer) const { return observables_[observer]; }

  int settings_total() const;            // sum_j m_j
  std::uint64_t state_dim() const;       // d^n
  std::uint64_t setting_combinations() const;  // prod_j m_j
  std::uint64_t assignment_count() const;      // prod_j d^{m_j}
  std::uint64_t full_row_count() const;        // prod_j m_j * d^n
  std::uint64_t reduced_row_count() const;     // prod_j (d + (m_j-1)(d-1))

  bool operator==(const ExperimentConfig&) const = default;

 private:
  int observers_;
  int outcomes_;
  std::vector<int> observables_;
};

// Mixed-radix codes with observer 1 as the most significant digit.
// Settings choices are 1-based per observer; outcome digits are 0-based.
std::uint32_t encode_settings_choice(const ExperimentConfig&, std::span<const int> choice);
std::vector<int> decode_settings_choice(const ExperimentConfig&, std::uint32_t code);
std::uint32_t encode_outcomes(const ExperimentConfig&, std::span<const int> outcomes);
std::vector<int> decode_outcomes(const ExperimentConfig&, std::uint32_t code);

}  // namespace bellvis
