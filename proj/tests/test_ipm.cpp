#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellvis/dense.hpp"
#include "bellvis/implicit_lp.hpp"
#include "bellvis/ipm.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/simplex.hpp"
#include "doctest.h"

using namespace bellvis;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752;

ImplicitLp ghz_lp(int n, std::uint64_t angle_seed) {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(n);
  const AngleVector angles = AngleVector::random(cfg, angle_seed);
  return build_lp(cfg, probability_table(make_ghz(n), cfg, angles));
}

ImplicitLp chsh_lp() {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(2);
  const double h = std::acos(-1.0) / 2.0;
  std::vector<std::vector<ObservableSetting>> s{
      {ObservableSetting(h, 0.0), ObservableSetting(h, h)},
      {ObservableSetting(h, -h / 2.0), ObservableSetting(h, h / 2.0)},
  };
  return build_lp(cfg, probability_table(make_ghz(2), cfg, AngleVector(cfg, std::move(s))));
}

struct KernelInputs {
  std::vector<double> theta, rp, rd, g;
};

KernelInputs random_kernel_inputs(const ImplicitLp& lp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  std::normal_distribution<double> gauss;
  KernelInputs in;
  in.theta.resize(lp.cols());
  in.rp.resize(lp.cols());
  in.rd.resize(lp.rows());
  in.g.resize(lp.rows());
  for (double& v : in.theta) v = unit(rng);
  for (double& v : in.rp) v = 1e-3 * unit(rng);
  for (double& v : in.rd) v = 1e-3 * unit(rng);
  for (double& v : in.g) v = gauss(rng);
  return in;
}

}  // namespace

TEST_CASE("pcg returns immediately on a zero right-hand side") {
  const ImplicitLp lp = ghz_lp(2, 3);
  const KernelInputs in = random_kernel_inputs(lp, 1);
  const auto pc = partial_cholesky(lp, ThetaDiag(in.theta), in.rp, in.rd, 4);
  const std::vector<double> zero(lp.rows(), 0.0);
  const PcgResult r = pcg_solve(lp, ThetaDiag(in.theta), in.rp, in.rd, pc, zero, 1e-8, 100);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  for (double v : r.dy) CHECK(v == 0.0);
}

TEST_CASE("full rank preconditioner makes pcg a direct solve") {
  const ImplicitLp lp = ghz_lp(3, 5);
  const KernelInputs in = random_kernel_inputs(lp, 2);
  const auto pc =
      partial_cholesky(lp, ThetaDiag(in.theta), in.rp, in.rd, static_cast<int>(lp.rows()));
  CHECK(pc.k == lp.rows());
  const PcgResult r = pcg_solve(lp, ThetaDiag(in.theta), in.rp, in.rd, pc, in.g, 1e-8, 100);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("full rank preconditioner inverts the normal operator") {
  const ImplicitLp lp = ghz_lp(2, 9);
  const KernelInputs in = random_kernel_inputs(lp, 3);
  const std::size_t m = lp.rows();
  const auto pc = partial_cholesky(lp, ThetaDiag(in.theta), in.rp, in.rd, static_cast<int>(m));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  std::vector<double> v(m);
  for (double& e : v) e = gauss(rng);

  // G v through the kernels, then P^-1 (G v) must reproduce v.
  std::vector<double> aty = lp.at_times_y(v);
  for (std::size_t j = 0; j < lp.cols(); ++j) aty[j] /= 1.0 / in.theta[j] + in.rp[j];
  std::vector<double> gv = lp.a_times_x(aty);
  for (std::size_t i = 0; i < m; ++i) gv[i] += in.rd[i] * v[i];

  const std::vector<double> back = apply_preconditioner(pc, gv);
  for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(back[i] - v[i]) <= 1e-10);
}

TEST_CASE("pcg agrees with the dense direction oracle") {
  for (int n : {2, 3}) {
    const ImplicitLp lp = ghz_lp(n, 13 + n);
    const KernelInputs in = random_kernel_inputs(lp, 100 + n);
    const auto oracle =
        reference::dense_direction_oracle(lp, ThetaDiag(in.theta), in.rp, in.rd, in.g);
    const auto pc = partial_cholesky(lp, ThetaDiag(in.theta), in.rp, in.rd, 8);
    const PcgResult r =
        pcg_solve(lp, ThetaDiag(in.theta), in.rp, in.rd, pc, in.g, 1e-12, 10000);
    REQUIRE(r.converged);
    double scale = 1.0;
    for (double v : oracle) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(std::abs(r.dy[i] - oracle[i]) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("newton directions satisfy the regularized optimality system") {
  const ImplicitLp lp = ghz_lp(3, 21);
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  IpmSettings settings;
  settings.chol_rank = static_cast<int>(m);  // exact solve, identities hold to roundoff
  IpmState state = IpmState::initial(lp, settings);
  state.refresh(lp);

  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss;
  NewtonRhs rhs;
  rhs.primal.resize(m);
  rhs.dual.resize(n);
  rhs.comp_lower.resize(n);
  rhs.comp_upper.resize(n);
  for (double& v : rhs.primal) v = gauss(rng);
  for (double& v : rhs.dual) v = gauss(rng);
  for (double& v : rhs.comp_lower) v = gauss(rng);
  for (double& v : rhs.comp_upper) v = gauss(rng);

  const Direction dir = compute_direction(lp, state, rhs, settings);
  REQUIRE(dir.ok);

  const std::vector<double> adx = lp.a_times_x(dir.dx);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(std::abs(adx[i] + state.reg_dual[i] * dir.dy[i] - rhs.primal[i]) <= 1e-8);
  }
  const std::vector<double> aty = lp.at_times_y(dir.dy);
  for (std::size_t j = 0; j < n; ++j) {
    const double dual_row =
        aty[j] + dir.ds[j] - dir.dw[j] - state.reg_primal[j] * dir.dx[j];
    CHECK(std::abs(dual_row - rhs.dual[j]) <= 1e-8);
    const double lower_row = state.x[j] * dir.ds[j] + state.s[j] * dir.dx[j];
    CHECK(std::abs(lower_row - rhs.comp_lower[j]) <= 1e-8);
    const double upper_row =
        (1.0 - state.x[j]) * dir.dw[j] - state.w[j] * dir.dx[j];
    CHECK(std::abs(upper_row - rhs.comp_upper[j]) <= 1e-8);
  }
}

TEST_CASE("interior point reaches the perfect-model optimum") {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(3);
  const ImplicitLp lp = build_lp(cfg, ProbabilityTable::uniform(cfg, TableMode::Reduced));
  const IpmResult r = ipm_solve(lp);
  REQUIRE(r.status == IpmStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("interior point matches the two qubit analytic value") {
  const IpmResult r = ipm_solve(chsh_lp());
  REQUIRE(r.status == IpmStatus::Optimal);
  CHECK(r.objective == doctest::Approx(kInvSqrt2).epsilon(5e-5));
}

TEST_CASE("interior point and simplex agree on random instances") {
  for (std::uint64_t seed : {101, 202, 303}) {
    const ImplicitLp lp = ghz_lp(3, seed);
    const IpmResult ipm = ipm_solve(lp);
    REQUIRE(ipm.status == IpmStatus::Optimal);
    const auto sx = reference::simplex_solve(reference::materialize_dense(lp));
    REQUIRE(sx.status == reference::SimplexStatus::Optimal);
    CHECK(ipm.objective == doctest::Approx(sx.objective).epsilon(5e-4));
  }
}

TEST_CASE("complementarity decreases monotonically across iterations") {
  const IpmResult r = ipm_solve(ghz_lp(3, 404));
  REQUIRE(r.status == IpmStatus::Optimal);
  REQUIRE(r.iterations_detail.size() >= 2);
  for (std::size_t t = 1; t < r.iterations_detail.size(); ++t) {
    const double prev = r.iterations_detail[t - 1].mu;
    const double cur = r.iterations_detail[t].mu;
    CHECK(cur <= 0.99 * prev * (1.0 + 1e-9));
  }
}

TEST_CASE("solves are deterministic") {
  const ImplicitLp lp = ghz_lp(3, 505);
  const IpmResult a = ipm_solve(lp);
  const IpmResult b = ipm_solve(lp);
  CHECK(a.objective == b.objective);
  CHECK(a.ipm_iterations == b.ipm_iterations);
  CHECK(a.total_cg_iterations == b.total_cg_iterations);
}

TEST_CASE("objective scaling does not move the reported optimum") {
  const ImplicitLp lp = chsh_lp();
  IpmSettings scaled;
  scaled.objective_scale = 8.0;
  const IpmResult a = ipm_solve(lp);
  const IpmResult b = ipm_solve(lp, scaled);
  REQUIRE(a.status == IpmStatus::Optimal);
  REQUIRE(b.status == IpmStatus::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(5e-4));
}

TEST_CASE("an expired deadline stops the solve before any iteration") {
  IpmSettings settings;
  settings.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  const IpmResult r = ipm_solve(ghz_lp(3, 606), settings);
  CHECK(r.status == IpmStatus::IterationLimit);
  CHECK(r.deadline_exceeded);
  CHECK(r.ipm_iterations == 0);
}

TEST_CASE("trace emits one csv row per accepted iteration") {
  std::ostringstream trace;
  IpmSettings settings;
  settings.trace = &trace;
  const IpmResult r = ipm_solve(chsh_lp(), settings);
  REQUIRE(r.status == IpmStatus::Optimal);

  std::istringstream lines(trace.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "iteration,mu,gap,cg_iterations,residual");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == r.ipm_iterations);
}
