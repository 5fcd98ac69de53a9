#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "bellvis/dense.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/implicit_lp.hpp"
#include "bellvis/mps.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/simplex.hpp"
#include "doctest.h"

using namespace bellvis;
using reference::DenseLp;
using reference::SimplexResult;
using reference::SimplexSettings;
using reference::SimplexStatus;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752;

DenseLp tiny_lp(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                std::vector<double> u) {
  DenseLp lp;
  lp.m = b.size();
  lp.n = c.size();
  lp.a = std::move(a);
  lp.b = std::move(b);
  lp.c = std::move(c);
  lp.u = std::move(u);
  return lp;
}

AngleVector chsh_angles(const ExperimentConfig& cfg) {
  const double h = std::acos(-1.0) / 2.0;  // pi/2
  std::vector<std::vector<ObservableSetting>> s{
      {ObservableSetting(h, 0.0), ObservableSetting(h, h)},
      {ObservableSetting(h, -h / 2.0), ObservableSetting(h, h / 2.0)},
  };
  return AngleVector(cfg, std::move(s));
}

ImplicitLp ghz_lp(int n, std::uint64_t angle_seed) {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(n);
  const AngleVector angles = AngleVector::random(cfg, angle_seed);
  return build_lp(cfg, probability_table(make_ghz(n), cfg, angles));
}

}  // namespace

TEST_CASE("simplex solves a one-constraint program") {
  const DenseLp lp = tiny_lp({1.0, 1.0}, {1.0}, {1.0, 0.0}, {1.0, 1.0});
  const SimplexResult r = simplex_solve(lp);
  CHECK(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.primal_residual <= 1e-12);
}

TEST_CASE("simplex pins variables at finite upper bounds") {
  // max 2 x1 + x2, x1 + x2 = 1.5, 0 <= x <= 1: x1 rides its bound.
  const DenseLp lp = tiny_lp({1.0, 1.0}, {1.5}, {2.0, 1.0}, {1.0, 1.0});
  const SimplexResult r = simplex_solve(lp);
  CHECK(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simplex reports infeasible programs") {
  const DenseLp lp = tiny_lp({1.0, 1.0}, {3.0}, {1.0, 0.0}, {1.0, 1.0});
  CHECK(simplex_solve(lp).status == SimplexStatus::Infeasible);
}

TEST_CASE("simplex handles a redundant constraint pair") {
  // Duplicate rows leave phase one with an artificial stuck in the basis.
  const DenseLp lp =
      tiny_lp({1.0, 1.0, 1.0, 1.0}, {1.0, 1.0}, {1.0, 0.5}, {1.0, 1.0});
  const SimplexResult r = simplex_solve(lp);
  CHECK(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.primal_residual <= 1e-10);
}

TEST_CASE("simplex honors a deadline") {
  const ImplicitLp lp = ghz_lp(4, 5);
  SimplexSettings s;
  s.deadline = std::chrono::steady_clock::now();
  const SimplexResult r = simplex_solve(reference::materialize_dense(lp), s);
  CHECK(r.deadline_exceeded);
  CHECK(r.status != SimplexStatus::Optimal);
}

TEST_CASE("two qubit critical visibility at the optimal settings is 1/sqrt(2)") {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(2);
  const AngleVector angles = chsh_angles(cfg);
  const ImplicitLp lp = build_lp(cfg, probability_table(make_ghz(2), cfg, angles));
  const SimplexResult r = simplex_solve(reference::materialize_dense(lp));
  REQUIRE(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(kInvSqrt2).epsilon(1e-9));
  CHECK(r.primal_residual <= 1e-9);
}

TEST_CASE("aligned z measurements admit a perfect local model") {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(2);
  std::vector<std::vector<ObservableSetting>> s{
      {ObservableSetting(0.0, 0.0), ObservableSetting(0.0, 0.0)},
      {ObservableSetting(0.0, 0.0), ObservableSetting(0.0, 0.0)},
  };
  const ImplicitLp lp =
      build_lp(cfg, probability_table(make_ghz(2), cfg, AngleVector(cfg, std::move(s))));
  const SimplexResult r = simplex_solve(reference::materialize_dense(lp));
  REQUIRE(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform probabilities admit a perfect local model") {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(3);
  const ImplicitLp lp = build_lp(cfg, ProbabilityTable::uniform(cfg, TableMode::Reduced));
  const SimplexResult r = simplex_solve(reference::materialize_dense(lp));
  REQUIRE(r.status == SimplexStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two observer constraint matrix has full row rank") {
  const ImplicitLp lp = ghz_lp(2, 11);
  const DenseLp dense = reference::materialize_dense(lp);
  CHECK(reference::dense_rank(dense.a, dense.m, dense.n) == 9);
}

TEST_CASE("rank detects dependent rows") {
  const std::vector<double> a{1.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  CHECK(reference::dense_rank(a, 3, 2) == 2);
}

TEST_CASE("dense materialization refuses oversized systems") {
  CHECK_THROWS_AS(reference::materialize_dense(ghz_lp(7, 3)), SizeCapError);
}

TEST_CASE("direction oracle satisfies its normal equations") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  std::normal_distribution<double> gauss;
  const ImplicitLp lp = ghz_lp(2, 23);
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();

  std::vector<double> theta_v(n), rp(n), rd(m), g(m);
  for (double& v : theta_v) v = unit(rng);
  for (double& v : rp) v = 1e-3 * unit(rng);
  for (double& v : rd) v = 1e-3 * unit(rng);
  for (double& v : g) v = gauss(rng);

  const auto dy = reference::dense_direction_oracle(lp, ThetaDiag(theta_v), rp, rd, g);
  REQUIRE(dy.size() == m);

  // residual of (A ThetaR A^T + R_d) dy - g through the implicit kernels
  std::vector<double> aty = lp.at_times_y(dy);
  for (std::size_t j = 0; j < n; ++j) aty[j] /= 1.0 / theta_v[j] + rp[j];
  const std::vector<double> ax = lp.a_times_x(aty);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(std::abs(ax[i] + rd[i] * dy[i] - g[i]) <= 1e-8);
  }
}

TEST_CASE("mps files round trip bit for bit") {
  const ImplicitLp lp = ghz_lp(3, 47);
  const DenseLp expect = reference::materialize_dense(lp);
  const auto path = (std::filesystem::temp_directory_path() / "bellvis_roundtrip.mps").string();
  write_mps(lp, path);
  const DenseLp got = read_mps(path);
  std::remove(path.c_str());

  REQUIRE(got.m == expect.m);
  REQUIRE(got.n == expect.n);
  CHECK(got.a == expect.a);
  CHECK(got.b == expect.b);
  CHECK(got.c == expect.c);
  CHECK(got.u == expect.u);
}
