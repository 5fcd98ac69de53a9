#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bellvis/experiment.hpp"

namespace bellvis {

// Pure n-qubit state.  Amplitudes are indexed with observer 1 as the most
// significant qubit; the norm must already be 1 to within 1e-12.
class PureState {
 public:
  PureState(int observers, std::vector<std::complex<double>> amplitudes);

  // Rescales arbitrary nonzero amplitudes to unit norm before constructing.
  static PureState normalized(int observers, std::vector<std::complex<double>> amplitudes);

  int observers() const { return observers_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amplitudes_; }

 private:
  int observers_;
  std::vector<std::complex<double>> amplitudes_;
};

// (|0...0> + |1...1>) / sqrt(2)
PureState make_ghz(int observers);

// State file layout: first line the observer count n, then 2^n lines of
// "re im" amplitude pairs, observer 1 most significant.  The amplitudes are
// renormalized after the 1e-6 norm gate so downstream code sees unit norm.
PureState load_state_file(const std::string& path);
void save_state_file(const PureState&, const std::string& path);

// One projective qubit measurement direction in Bloch angles.  Construction
// wraps phi into [0, 2*pi) and reflects theta into [0, pi]; the reflection
// flips the basis vectors only by a global phase, so probabilities are
// unchanged.
class ObservableSetting {
 public:
  ObservableSetting(double theta, double phi);

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  // Outcome 0 projects onto (cos(t/2), e^{ip} sin(t/2)),
  // outcome 1 onto       (sin(t/2), -e^{ip} cos(t/2)).
  std::complex<double> basis_component(int outcome, int component) const;

  bool operator==(const ObservableSetting&) const = default;

 private:
  double theta_;
  double phi_;
};

// settings()[j][t] is observable t+1 of observer j (both 0-based here).
// Default construction yields an empty placeholder with no settings.
class AngleVector {
 public:
  AngleVector() = default;
  AngleVector(const ExperimentConfig&, std::vector<std::vector<ObservableSetting>> settings);

  const std::vector<std::vector<ObservableSetting>>& settings() const { return settings_; }
  const ObservableSetting& setting(int observer, int observable_1based) const;

  // Flat layout (theta, phi) per observable, observers then observables in
  // order; used by the downhill-simplex search.
  std::vector<double> to_flat() const;
  static AngleVector from_flat(const ExperimentConfig&, std::span<const double> flat);

  static AngleVector random(const ExperimentConfig&, std::uint64_t seed);

 private:
  std::vector<std::vector<ObservableSetting>> settings_;
};

enum class TableMode { Reduced, Full };

// Sparse map from (settings choice, outcome tuple) codes to Born
// probabilities.  Reduced mode holds exactly the rows the reduced LP needs.
class ProbabilityTable {
 public:
  ProbabilityTable(ExperimentConfig config, TableMode mode);

  const ExperimentConfig& config() const { return config_; }
  TableMode mode() const { return mode_; }
  std::size_t size() const { return entries_.size(); }

  bool has(std::uint32_t settings_code, std::uint32_t outcome_code) const;
  double at(std::uint32_t settings_code, std::uint32_t outcome_code) const;
  void set(std::uint32_t settings_code, std::uint32_t outcome_code, double probability);

  // Sums outcomes for one settings choice; only meaningful when every
  // outcome tuple of that choice is present (always true in Full mode).
  double settings_sum(std::uint32_t settings_code) const;

  // Checks sum-to-one for every settings choice whose outcome tuples are all
  // present.  Throws TableError beyond `tol`.
  void validate_normalization(double tol = 1e-10) const;

  // Every probability d^-n regardless of angles; handy as a debug input
  // since the LP then has a zero visibility column and optimum 1.
  static ProbabilityTable uniform(const ExperimentConfig&, TableMode mode);

 private:
  ExperimentConfig config_;
  TableMode mode_;
  std::unordered_map<std::uint64_t, double> entries_;
};

// Born probability of one outcome tuple given each observer's chosen
// measurement; chosen_settings[j] is the setting observer j used.
double outcome_probability(const PureState&, std::span<const ObservableSetting> chosen_settings,
                           std::span<const int> outcomes);

// Fills the table for the reduced row set (default) or all rows.
ProbabilityTable probability_table(const PureState&, const ExperimentConfig&, const AngleVector&,
                                   TableMode mode = TableMode::Reduced);

}  // namespace bellvis
