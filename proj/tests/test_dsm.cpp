#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellvis/dsm.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/experiment.hpp"
#include "doctest.h"

using namespace bellvis;

namespace {

const ExperimentConfig kTwo = ExperimentConfig::two_setting_qubits(2);

}  // namespace

TEST_CASE("constant objectives converge immediately") {
  const DsmResult r = dsm_minimize([](std::span<const double>) { return 1.0; }, kTwo);
  CHECK(r.best_value == 1.0);
  CHECK(r.converged);
  CHECK(r.per_restart_values.size() == 5);
  CHECK(r.per_restart_evaluations.size() == 5);
  CHECK(r.per_restart_seconds.size() == 5);
  for (double v : r.per_restart_values) CHECK(v == 1.0);
}

TEST_CASE("a smooth bowl is minimized to tolerance") {
  // Minimum 2.0 at flat coordinates (0.3, ..., 0.3).
  const auto bowl = [](std::span<const double> v) {
    double s = 2.0;
    for (double c : v) s += (c - 0.3) * (c - 0.3);
    return s;
  };
  DsmSettings settings;
  settings.ftol = 1e-9;
  settings.max_evaluations = 20000;
  settings.restarts = 2;
  const DsmResult r = dsm_minimize(bowl, kTwo, settings);
  CHECK(r.converged);
  CHECK(r.best_value == doctest::Approx(2.0).epsilon(1e-6));
  for (double c : r.best_angles.to_flat()) CHECK(std::abs(c - 0.3) <= 1e-3);
}

TEST_CASE("searches are seed deterministic") {
  const auto wavy = [](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::sin(3.0 * v[i] + double(i));
    return s;
  };
  DsmSettings settings;
  settings.restarts = 3;
  settings.rng_seed = 42;
  const DsmResult a = dsm_minimize(wavy, kTwo, settings);
  const DsmResult b = dsm_minimize(wavy, kTwo, settings);
  CHECK(a.best_value == b.best_value);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.per_restart_values == b.per_restart_values);
  CHECK(a.best_angles.to_flat() == b.best_angles.to_flat());

  DsmSettings other = settings;
  other.rng_seed = 43;
  const DsmResult c = dsm_minimize(wavy, kTwo, other);
  CHECK(c.best_value != a.best_value);
}

TEST_CASE("a throwing restart is skipped and recorded as nan") {
  std::atomic<int> calls{0};
  const auto flaky = [&](std::span<const double> v) {
    if (calls.fetch_add(1) == 0) throw NumericalError("transient failure");
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
  };
  DsmSettings settings;
  settings.restarts = 3;
  const DsmResult r = dsm_minimize(flaky, kTwo, settings);
  REQUIRE(r.per_restart_values.size() == 3);
  CHECK(std::isnan(r.per_restart_values[0]));
  CHECK(std::isfinite(r.per_restart_values[1]));
  CHECK(std::isfinite(r.per_restart_values[2]));
  CHECK(std::isfinite(r.best_value));
}

TEST_CASE("every restart failing raises a solver error") {
  const auto broken = [](std::span<const double>) -> double {
    throw NumericalError("always fails");
  };
  DsmSettings settings;
  settings.restarts = 2;
  CHECK_THROWS_AS(dsm_minimize(broken, kTwo, settings), NumericalError);
}

TEST_CASE("evaluation budgets are respected per restart") {
  const auto bowl = [](std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
  };
  DsmSettings settings;
  settings.ftol = 1e-300;  // effectively never converges; only the budget stops a restart
  settings.max_evaluations = 120;
  settings.restarts = 3;
  const DsmResult r = dsm_minimize(bowl, kTwo, settings);
  long total = 0;
  for (long e : r.per_restart_evaluations) {
    CHECK(e <= 120);
    total += e;
  }
  CHECK(r.evaluations == total);
  CHECK(std::isfinite(r.best_value));
}

TEST_CASE("an expired deadline is reported") {
  const auto bowl = [](std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
  };
  DsmSettings settings;
  settings.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  const DsmResult r = dsm_minimize(bowl, kTwo, settings);
  CHECK(r.deadline_exceeded);
}

TEST_CASE("trace lists every evaluation with the flat coordinates") {
  std::ostringstream trace;
  DsmSettings settings;
  settings.restarts = 1;
  settings.max_evaluations = 50;
  settings.trace = &trace;
  const auto bowl = [](std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
  };
  const DsmResult r = dsm_minimize(bowl, kTwo, settings);

  std::istringstream lines(trace.str());
  std::string header;
  REQUIRE(std::getline(lines, header));
  CHECK(header.rfind("evaluation,", 0) == 0);
  CHECK(header.find("value") != std::string::npos);
  long rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') ==
          std::count(header.begin(), header.end(), ','));
  }
  CHECK(rows == r.evaluations);
}
