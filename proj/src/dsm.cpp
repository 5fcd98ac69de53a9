#include "bellvis/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bellvis/errors.hpp"
#include "bellvis/rng.hpp"

namespace bellvis {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct RestartOutcome {
  double value = 0.0;
  std::vector<double> point;
  bool converged = false;
  bool hit_deadline = false;
};

class SimplexSearch {
 public:
  SimplexSearch(const DsmObjective& objective, const DsmSettings& settings, long& evaluations)
      : objective_(objective),
        settings_(settings),
        evaluations_(evaluations),
        budget_(settings.max_evaluations) {}

  // The evaluation budget spans every run() of this search, so a restart may
  // re-seed the simplex at a claimed minimum without exceeding its quota.
  int budget_remaining() const { return budget_; }

  RestartOutcome run(std::vector<double> base) {
    const std::size_t dim = base.size();
    points_.assign(dim + 1, base);
    values_.assign(dim + 1, 0.0);
    evaluated_ = 0;
    for (std::size_t v = 1; v <= dim; ++v) points_[v][v - 1] += settings_.initial_step;

    RestartOutcome out;
    for (std::size_t v = 0; v <= dim; ++v) {
      if (!evaluate(points_[v], values_[v], out)) return finish(out);
      evaluated_ = v + 1;
    }

    std::vector<double> centroid(dim), trial(dim);
    while (true) {
      order();
      const double fl = values_.front();
      const double fh = values_.back();
      if (2.0 * std::abs(fh - fl) / (std::abs(fh) + std::abs(fl) + 1e-10) <= settings_.ftol) {
        out.converged = true;
        return finish(out);
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v < dim; ++v) {
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += points_[v][j];
      }
      for (double& c : centroid) c /= static_cast<double>(dim);

      blend(centroid, points_.back(), 1.0 + kReflect, -kReflect, trial);
      double f_reflect;
      if (!evaluate(trial, f_reflect, out)) return finish(out);

      if (f_reflect < fl) {
        std::vector<double> expanded(dim);
        blend(centroid, points_.back(), 1.0 + kReflect * kExpand, -kReflect * kExpand, expanded);
        double f_expand;
        if (!evaluate(expanded, f_expand, out)) return finish(out);
        if (f_expand < f_reflect) {
          points_.back() = expanded;
          values_.back() = f_expand;
        } else {
          points_.back() = trial;
          values_.back() = f_reflect;
        }
        continue;
      }
      if (f_reflect < values_[dim - 1]) {
        points_.back() = trial;
        values_.back() = f_reflect;
        continue;
      }

      const bool outside = f_reflect < fh;
      const std::vector<double>& anchor = outside ? trial : points_.back();
      const double f_anchor = outside ? f_reflect : fh;
      std::vector<double> contracted(dim);
      blend(centroid, anchor, 1.0 - kContract, kContract, contracted);
      double f_contract;
      if (!evaluate(contracted, f_contract, out)) return finish(out);
      if (f_contract < f_anchor) {
        points_.back() = contracted;
        values_.back() = f_contract;
        continue;
      }

      for (std::size_t v = 1; v <= dim; ++v) {
        blend(points_.front(), points_[v], 1.0 - kShrink, kShrink, points_[v]);
        if (!evaluate(points_[v], values_[v], out)) return finish(out);
      }
    }
  }

 private:
  static void blend(const std::vector<double>& a, const std::vector<double>& b, double wa,
                    double wb, std::vector<double>& out) {
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = wa * a[j] + wb * b[j];
  }

  bool evaluate(const std::vector<double>& point, double& value, RestartOutcome& out) {
    if (budget_ <= 0) return false;
    if (settings_.deadline && std::chrono::steady_clock::now() > *settings_.deadline) {
      out.hit_deadline = true;
      return false;
    }
    --budget_;
    ++evaluations_;
    try {
      value = objective_(point);
    } catch (...) {
      trace_row(point, std::numeric_limits<double>::quiet_NaN(), "error");
      throw;
    }
    if (!std::isfinite(value)) {
      trace_row(point, value, "error");
      throw NumericalError("objective returned a non-finite value");
    }
    trace_row(point, value, "ok");
    return true;
  }

  void trace_row(const std::vector<double>& point, double value, const char* status) {
    if (!settings_.trace) return;
    *settings_.trace << evaluations_;
    for (double c : point) *settings_.trace << ',' << c;
    *settings_.trace << ',' << value << ',' << status << '\n';
  }

  void order() {
    const std::size_t count = points_.size();
    std::vector<std::size_t> idx(count);
    for (std::size_t v = 0; v < count; ++v) idx[v] = v;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
    std::vector<std::vector<double>> points(count);
    std::vector<double> values(count);
    for (std::size_t v = 0; v < count; ++v) {
      points[v] = std::move(points_[idx[v]]);
      values[v] = values_[idx[v]];
    }
    points_ = std::move(points);
    values_ = std::move(values);
  }

  // Only vertices that were actually evaluated this run may be reported; a
  // budget or deadline cut during simplex construction leaves trailing slots
  // with meaningless placeholder values.
  RestartOutcome finish(RestartOutcome out) {
    if (evaluated_ == 0) {
      out.value = std::numeric_limits<double>::infinity();
      out.point = points_.front();
      return out;
    }
    std::size_t best = 0;
    for (std::size_t v = 1; v < evaluated_; ++v) {
      if (values_[v] < values_[best]) best = v;
    }
    out.value = values_[best];
    out.point = points_[best];
    return out;
  }

  const DsmObjective& objective_;
  const DsmSettings& settings_;
  long& evaluations_;
  std::vector<std::vector<double>> points_;
  std::vector<double> values_;
  std::size_t evaluated_ = 0;
  int budget_ = 0;
};

}  // namespace

DsmResult dsm_minimize(const DsmObjective& objective, const ExperimentConfig& config,
                       const DsmSettings& settings) {
  if (settings.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (settings.max_evaluations < 1) throw ConfigError("max_evaluations must be at least 1");
  if (!(settings.ftol > 0.0)) throw ConfigError("ftol must be positive");
  const std::size_t dim = 2 * static_cast<std::size_t>(config.settings_total());

  DsmResult result;
  bool have_best = false;
  std::vector<double> best_point;

  if (settings.trace) {
    *settings.trace << "evaluation";
    for (std::size_t j = 0; j < dim; ++j) {
      const char* kind = j % 2 == 0 ? "theta" : "phi";
      *settings.trace << ',' << kind << j / 2;
    }
    *settings.trace << ",value,status\n";
  }

  for (int r = 0; r < settings.restarts; ++r) {
    // Independent substream per restart: identical base points for a given
    // (seed, restart index) no matter how many restarts run.
    std::mt19937_64 rng(mix_seed(settings.rng_seed, 0x72737472ull + r));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> base(dim);
    for (std::size_t j = 0; j < dim; j += 2) {
      base[j] = unit(rng) * std::numbers::pi;
      base[j + 1] = unit(rng) * 2.0 * std::numbers::pi;
    }

    const long evals_before = result.evaluations;
    const auto started = std::chrono::steady_clock::now();
    bool stop = false;
    try {
      SimplexSearch search(objective, settings, result.evaluations);
      RestartOutcome outcome = search.run(std::move(base));
      // A high-dimensional simplex often collapses early; re-seeding a fresh
      // simplex at the claimed minimum until the value stops moving recovers
      // the search directions the collapse lost.
      while (outcome.converged && !outcome.hit_deadline && search.budget_remaining() > 0) {
        RestartOutcome again = search.run(outcome.point);
        const double change = 2.0 * std::abs(outcome.value - again.value) /
                              (std::abs(outcome.value) + std::abs(again.value) + 1e-10);
        const bool improved = again.value < outcome.value;
        if (again.hit_deadline) outcome.hit_deadline = true;
        if (improved) {
          outcome.value = again.value;
          outcome.point = std::move(again.point);
          outcome.converged = again.converged;
        }
        if (!improved || change <= settings.ftol) break;
      }
      result.per_restart_values.push_back(outcome.value);
      result.converged = result.converged || outcome.converged;
      if (std::isfinite(outcome.value) && (!have_best || outcome.value < result.best_value)) {
        result.best_value = outcome.value;
        best_point = std::move(outcome.point);
        have_best = true;
      }
      if (outcome.hit_deadline) {
        result.deadline_exceeded = true;
        stop = true;
      }
    } catch (const std::exception&) {
      // One bad restart (solver failure inside the objective) should not
      // discard the others.
      result.per_restart_values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    result.per_restart_evaluations.push_back(result.evaluations - evals_before);
    result.per_restart_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    if (stop) break;
  }

  if (!have_best) {
    // A deadline can cut the very first restart before any evaluation; that
    // is a timeout, not a solver failure, so it must reach the caller as one.
    if (result.deadline_exceeded) {
      result.best_value = std::numeric_limits<double>::quiet_NaN();
      return result;
    }
    throw NumericalError("every restart of the angle search failed");
  }
  result.best_angles = AngleVector::from_flat(config, best_point);
  return result;
}

}  // namespace bellvis
