#include "bellvis/quantum.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "bellvis/errors.hpp"
#include "bellvis/rng.hpp"
#include "bellvis/rows.hpp"

namespace bellvis {

namespace {

double norm_sq(const std::vector<std::complex<double>>& amps) {
  double s = 0.0;
  for (const auto& a : amps) s += std::norm(a);
  return s;
}

}  // namespace

PureState::PureState(int observers, std::vector<std::complex<double>> amplitudes)
    : observers_(observers), amplitudes_(std::move(amplitudes)) {
  if (observers_ < 2) throw ConfigError("need at least 2 observers");
  const std::uint64_t want = std::uint64_t{1} << observers_;
  if (amplitudes_.size() != want) {
    throw ShapeError("amplitude vector length must be 2^observers");
  }
  for (const auto& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ConfigError("non-finite amplitude");
    }
  }
  if (std::abs(std::sqrt(norm_sq(amplitudes_)) - 1.0) > 1e-12) {
    throw ConfigError("state norm must be 1 within 1e-12");
  }
}

PureState PureState::normalized(int observers, std::vector<std::complex<double>> amplitudes) {
  const double n = std::sqrt(norm_sq(amplitudes));
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("cannot normalize zero state");
  for (auto& a : amplitudes) a /= n;
  return PureState(observers, std::move(amplitudes));
}

PureState make_ghz(int observers) {
  if (observers < 2) throw ConfigError("need at least 2 observers");
  std::vector<std::complex<double>> amps(std::uint64_t{1} << observers, 0.0);
  const double r = 1.0 / std::numbers::sqrt2;
  amps.front() = r;
  amps.back() = r;
  return PureState(observers, std::move(amps));
}

PureState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open state file: " + path);
  int n = 0;
  if (!(in >> n)) throw IoError("state file missing observer count: " + path);
  if (n < 2 || n > 30) throw ConfigError("observer count out of range in state file");
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<std::complex<double>> amps(dim);
  for (std::uint64_t i = 0; i < dim; ++i) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) throw IoError("state file truncated: " + path);
    amps[i] = {re, im};
  }
  const double norm = std::sqrt(norm_sq(amps));
  if (std::abs(norm - 1.0) > 1e-6) {
    throw ConfigError("state file norm deviates from 1 by more than 1e-6");
  }
  for (auto& a : amps) a /= norm;
  return PureState(n, std::move(amps));
}

void save_state_file(const PureState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write state file: " + path);
  out.precision(17);
  out << state.observers() << "\n";
  for (const auto& a : state.amplitudes()) out << a.real() << " " << a.imag() << "\n";
  if (!out) throw IoError("write failed: " + path);
}

ObservableSetting::ObservableSetting(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw ConfigError("angles must be finite");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  theta = std::fmod(theta, two_pi);
  if (theta < 0.0) theta += two_pi;
  if (theta > std::numbers::pi) {
    theta = two_pi - theta;
    phi += std::numbers::pi;
  }
  phi = std::fmod(phi, two_pi);
  if (phi < 0.0) phi += two_pi;
  theta_ = theta;
  phi_ = phi;
}

std::complex<double> ObservableSetting::basis_component(int outcome, int component) const {
  const double c = std::cos(theta_ / 2.0);
  const double s = std::sin(theta_ / 2.0);
  const std::complex<double> phase = std::polar(1.0, phi_);
  if (outcome == 0) {
    return component == 0 ? std::complex<double>(c, 0.0) : phase * s;
  }
  return component == 0 ? std::complex<double>(s, 0.0) : -phase * c;
}

AngleVector::AngleVector(const ExperimentConfig& config,
                         std::vector<std::vector<ObservableSetting>> settings)
    : settings_(std::move(settings)) {
  if (static_cast<int>(settings_.size()) != config.observers()) {
    throw ShapeError("angle vector needs one settings list per observer");
  }
  for (int j = 0; j < config.observers(); ++j) {
    if (static_cast<int>(settings_[j].size()) != config.observables_for(j)) {
      throw ShapeError("angle vector settings count mismatch for an observer");
    }
  }
}

const ObservableSetting& AngleVector::setting(int observer, int observable_1based) const {
  return settings_.at(observer).at(static_cast<size_t>(observable_1based) - 1);
}

std::vector<double> AngleVector::to_flat() const {
  std::vector<double> flat;
  for (const auto& per_observer : settings_) {
    for (const auto& s : per_observer) {
      flat.push_back(s.theta());
      flat.push_back(s.phi());
    }
  }
  return flat;
}

AngleVector AngleVector::from_flat(const ExperimentConfig& config, std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != 2 * config.settings_total()) {
    throw ShapeError("flat angle vector length mismatch");
  }
  std::vector<std::vector<ObservableSetting>> settings;
  size_t i = 0;
  for (int j = 0; j < config.observers(); ++j) {
    std::vector<ObservableSetting> per;
    for (int t = 0; t < config.observables_for(j); ++t) {
      per.emplace_back(flat[i], flat[i + 1]);
      i += 2;
    }
    settings.push_back(std::move(per));
  }
  return AngleVector(config, std::move(settings));
}

AngleVector AngleVector::random(const ExperimentConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x616e676cull));
  std::uniform_real_distribution<double> theta_dist(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
  std::vector<std::vector<ObservableSetting>> settings;
  for (int j = 0; j < config.observers(); ++j) {
    std::vector<ObservableSetting> per;
    for (int t = 0; t < config.observables_for(j); ++t) {
      const double theta = theta_dist(rng);
      const double phi = phi_dist(rng);
      per.emplace_back(theta, phi);
    }
    settings.push_back(std::move(per));
  }
  return AngleVector(config, std::move(settings));
}

ProbabilityTable::ProbabilityTable(ExperimentConfig config, TableMode mode)
    : config_(std::move(config)), mode_(mode) {}

namespace {
std::uint64_t table_key(const ExperimentConfig& config, std::uint32_t settings_code,
                        std::uint32_t outcome_code) {
  return static_cast<std::uint64_t>(settings_code) * config.state_dim() + outcome_code;
}
}  // namespace

bool ProbabilityTable::has(std::uint32_t settings_code, std::uint32_t outcome_code) const {
  return entries_.count(table_key(config_, settings_code, outcome_code)) != 0;
}

double ProbabilityTable::at(std::uint32_t settings_code, std::uint32_t outcome_code) const {
  auto it = entries_.find(table_key(config_, settings_code, outcome_code));
  if (it == entries_.end()) {
    throw TableError("probability table is missing an entry required by the LP");
  }
  return it->second;
}

void ProbabilityTable::set(std::uint32_t settings_code, std::uint32_t outcome_code,
                           double probability) {
  if (settings_code >= config_.setting_combinations() || outcome_code >= config_.state_dim()) {
    throw ShapeError("probability table code out of range");
  }
  if (!std::isfinite(probability) || probability < -1e-12 || probability > 1.0 + 1e-12) {
    throw TableError("probability out of [0, 1]");
  }
  entries_[table_key(config_, settings_code, outcome_code)] =
      std::min(1.0, std::max(0.0, probability));
}

double ProbabilityTable::settings_sum(std::uint32_t settings_code) const {
  double sum = 0.0;
  for (std::uint64_t rc = 0; rc < config_.state_dim(); ++rc) {
    auto it = entries_.find(table_key(config_, settings_code, static_cast<std::uint32_t>(rc)));
    if (it != entries_.end()) sum += it->second;
  }
  return sum;
}

void ProbabilityTable::validate_normalization(double tol) const {
  for (std::uint64_t oc = 0; oc < config_.setting_combinations(); ++oc) {
    bool complete = true;
    double sum = 0.0;
    for (std::uint64_t rc = 0; rc < config_.state_dim(); ++rc) {
      auto it = entries_.find(table_key(config_, static_cast<std::uint32_t>(oc),
                                        static_cast<std::uint32_t>(rc)));
      if (it == entries_.end()) {
        complete = false;
        break;
      }
      sum += it->second;
    }
    if (complete && std::abs(sum - 1.0) > tol) {
      throw TableError("probabilities for a settings choice do not sum to 1");
    }
  }
}

ProbabilityTable ProbabilityTable::uniform(const ExperimentConfig& config, TableMode mode) {
  ProbabilityTable table(config, mode);
  const double p = 1.0 / static_cast<double>(config.state_dim());
  if (mode == TableMode::Full) {
    for (std::uint64_t oc = 0; oc < config.setting_combinations(); ++oc) {
      for (std::uint64_t rc = 0; rc < config.state_dim(); ++rc) {
        table.set(static_cast<std::uint32_t>(oc), static_cast<std::uint32_t>(rc), p);
      }
    }
  } else {
    for_each_reduced_row(config, [&](std::uint32_t oc, std::uint32_t rc, std::span<const int>,
                                     std::span<const int>) { table.set(oc, rc, p); });
  }
  return table;
}

double outcome_probability(const PureState& state,
                           std::span<const ObservableSetting> chosen_settings,
                           std::span<const int> outcomes) {
  const int n = state.observers();
  if (static_cast<int>(chosen_settings.size()) != n || static_cast<int>(outcomes.size()) != n) {
    throw ShapeError("need one chosen setting and one outcome per observer");
  }
  // Per-observer bra components, conjugated once up front.
  std::vector<std::complex<double>> bra0(n), bra1(n);
  for (int j = 0; j < n; ++j) {
    if (outcomes[j] < 0 || outcomes[j] > 1) throw ShapeError("outcome value out of range");
    bra0[j] = std::conj(chosen_settings[j].basis_component(outcomes[j], 0));
    bra1[j] = std::conj(chosen_settings[j].basis_component(outcomes[j], 1));
  }
  const auto& amps = state.amplitudes();
  std::complex<double> amp = 0.0;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (amps[i] == std::complex<double>(0.0, 0.0)) continue;
    std::complex<double> factor = 1.0;
    for (int j = 0; j < n; ++j) {
      const int bit = static_cast<int>((i >> (n - 1 - j)) & 1u);
      factor *= bit == 0 ? bra0[j] : bra1[j];
    }
    amp += factor * amps[i];
  }
  const double p = std::norm(amp);
  return std::min(1.0, std::max(0.0, p));
}

ProbabilityTable probability_table(const PureState& state, const ExperimentConfig& config,
                                   const AngleVector& angles, TableMode mode) {
  if (state.observers() != config.observers()) {
    throw ShapeError("state and experiment observer counts differ");
  }
  ProbabilityTable table(config, mode);
  const int n = config.observers();
  std::vector<ObservableSetting> chosen(n, ObservableSetting(0.0, 0.0));

  auto fill = [&](std::uint32_t oc, std::uint32_t rc, std::span<const int> choice,
                  std::span<const int> outs) {
    for (int j = 0; j < n; ++j) chosen[j] = angles.setting(j, choice[j]);
    table.set(oc, rc, outcome_probability(state, chosen, outs));
  };

  if (mode == TableMode::Reduced) {
    for_each_reduced_row(config, fill);
    return table;
  }
  for (std::uint64_t oc = 0; oc < config.setting_combinations(); ++oc) {
    const std::vector<int> choice = decode_settings_choice(config, static_cast<std::uint32_t>(oc));
    for (std::uint64_t rc = 0; rc < config.state_dim(); ++rc) {
      const std::vector<int> outs = decode_outcomes(config, static_cast<std::uint32_t>(rc));
      fill(static_cast<std::uint32_t>(oc), static_cast<std::uint32_t>(rc), choice, outs);
    }
  }
  return table;
}

}  // namespace bellvis
