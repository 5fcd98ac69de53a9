// End-to-end acceptance checks. Each criterion prints exactly one
// [PASS]/[FAIL] line ([SKIP] for the long eight-observer reproduction unless
// --full is given); the process exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <exception>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bellvis/commands.hpp"
#include "bellvis/dense.hpp"
#include "bellvis/dsm.hpp"
#include "bellvis/implicit_lp.hpp"
#include "bellvis/ipm.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/rows.hpp"
#include "bellvis/run_config.hpp"
#include "bellvis/simplex.hpp"
#include "bellvis/visibility.hpp"

using namespace bellvis;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double analytic_minimum(int n) { return std::pow(2.0, 0.5 * (1.0 - n)); }

// All observers measure in the equatorial plane; phases 0 and pi/2, except
// that an even observer count needs the last observer at -pi/4 and pi/4 to
// reach the analytic minimum.
AngleVector fixed_minimum_angles(const ExperimentConfig& cfg) {
  const double pi = std::acos(-1.0);
  const int n = cfg.observers();
  std::vector<std::vector<ObservableSetting>> s;
  s.reserve(n);
  for (int j = 0; j < n; ++j) {
    double p0 = 0.0;
    double p1 = pi / 2.0;
    if (n % 2 == 0 && j == n - 1) {
      p0 = -pi / 4.0;
      p1 = pi / 4.0;
    }
    s.push_back({ObservableSetting(pi / 2.0, p0), ObservableSetting(pi / 2.0, p1)});
  }
  return AngleVector(cfg, std::move(s));
}

ImplicitLp ghz_lp(int n, std::uint64_t angle_seed) {
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(n);
  const AngleVector angles = AngleVector::random(cfg, angle_seed);
  return build_lp(cfg, probability_table(make_ghz(n), cfg, angles));
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return std::string(buf);
}

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(const char* name, Fn&& fn) {
  bool ok = false;
  std::string detail;
  try {
    ok = fn(detail);
  } catch (const std::exception& ex) {
    ok = false;
    detail = std::string("exception: ") + ex.what();
  }
  report(name, ok, detail);
}

// Minimal critical visibility over random restarts matches the analytic
// sequence for 2..5 observers on the matrix-free solver (within 0.01, under
// a 600 second budget) and for 2..4 observers on the exact oracle (within
// 5e-4 at a tight simplex-search tolerance).
bool run_restart_minimum(std::string& detail) {
  constexpr double kTolIpm = 0.01;
  constexpr double kTolSimplex = 5e-4;
  constexpr double kBudgetSeconds = 600.0;
  struct Budget {
    int n;
    int restarts;
  };
  bool ok = true;

  const auto start = Clock::now();
  for (const Budget run : {Budget{2, 5}, Budget{3, 21}, Budget{4, 5}, Budget{5, 5}}) {
    const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(run.n);
    auto state = std::make_shared<const PureState>(make_ghz(run.n));
    DsmSettings dsm;
    dsm.restarts = run.restarts;
    dsm.rng_seed = 1;
    const DsmResult r =
        dsm_minimize(critical_visibility_objective(state, cfg, SolverChoice::Ipm), cfg, dsm);
    const double expect = analytic_minimum(run.n);
    if (std::abs(r.best_value - expect) > kTolIpm) ok = false;
    detail += fmt("n=%d %.4f ", run.n, r.best_value);
  }
  const double elapsed = seconds_since(start);
  detail += fmt("(%.0fs) ", elapsed);
  if (elapsed > kBudgetSeconds) ok = false;

  for (const Budget run : {Budget{2, 5}, Budget{3, 21}, Budget{4, 5}}) {
    const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(run.n);
    auto state = std::make_shared<const PureState>(make_ghz(run.n));
    DsmSettings dsm;
    dsm.restarts = run.restarts;
    dsm.rng_seed = 1;
    dsm.ftol = 1e-5;
    const DsmResult r = dsm_minimize(
        critical_visibility_objective(state, cfg, SolverChoice::Simplex), cfg, dsm);
    const double expect = analytic_minimum(run.n);
    if (std::abs(r.best_value - expect) > kTolSimplex) ok = false;
    detail += fmt("oracle n=%d %.6f ", run.n, r.best_value);
  }
  return ok;
}

// At the fixed equatorial measurement settings the matrix-free solver
// reproduces the analytic values for 4..7 observers within 0.007; the
// seven-observer solve stays under 600 seconds.
bool run_fixed_angles(std::string& detail) {
  constexpr double kTol = 0.007;
  constexpr double kBudgetSeconds = 600.0;
  bool ok = true;
  for (int n = 4; n <= 7; ++n) {
    const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(n);
    const auto start = Clock::now();
    const double v =
        critical_visibility(make_ghz(n), cfg, fixed_minimum_angles(cfg), SolverChoice::Ipm);
    const double elapsed = seconds_since(start);
    if (std::abs(v - analytic_minimum(n)) > kTol) ok = false;
    if (n == 7 && elapsed > kBudgetSeconds) ok = false;
    detail += fmt("n=%d %.6f (%.1fs) ", n, v, elapsed);
  }
  return ok;
}

// 100 random five- and six-observer instances solved by both solvers agree
// to 0.01 in the worst case.
bool run_solver_crosscheck(std::string& detail) {
  constexpr double kTol = 0.01;
  constexpr int kSamples = 100;
  bool ok = true;
  for (int n : {5, 6}) {
    RunConfig cfg;
    cfg.experiment = ExperimentConfig::two_setting_qubits(n);
    cfg.verify_samples = kSamples;
    const nlohmann::json rep = cmd_verify(cfg);
    const double max_diff = rep.at("max_abs_diff").get<double>();
    if (!(rep.at("ok").get<bool>() && max_diff <= kTol)) ok = false;
    detail += fmt("n=%d max %.2e (%.0fs) ", n, max_diff, rep.at("wall_seconds").get<double>());
  }
  return ok;
}

// The reduced system keeps exactly 3^n rows, drops the expected dependent
// rows in the two-observer enumeration, and still has full row rank.
bool run_row_reduction(std::string& detail) {
  bool ok = true;
  for (int n = 2; n <= 8; ++n) {
    std::uint64_t expect = 1;
    for (int j = 0; j < n; ++j) expect *= 3;
    const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(n);
    if (cfg.reduced_row_count() != expect) ok = false;
    if (n <= 5 && reduced_row_set(cfg).size() != expect) ok = false;
  }

  const ExperimentConfig two = ExperimentConfig::two_setting_qubits(2);
  std::vector<int> dropped;
  int position = 0;
  for (int s1 = 1; s1 <= 2; ++s1) {
    for (int s2 = 1; s2 <= 2; ++s2) {
      for (int a = 0; a <= 1; ++a) {
        for (int b = 0; b <= 1; ++b) {
          ++position;
          const std::vector<int> choice{s1, s2};
          const std::vector<int> outcomes{a, b};
          if (!is_reduced_row(two, choice, outcomes)) dropped.push_back(position);
        }
      }
    }
  }
  if (dropped != std::vector<int>{6, 8, 11, 12, 14, 15, 16}) ok = false;

  const reference::DenseLp dense = reference::materialize_dense(ghz_lp(2, 1));
  const std::size_t rank = reference::dense_rank(dense.a, dense.m, dense.n);
  if (rank != 9) ok = false;
  detail = fmt("rows 3^n for n=2..8, drop list ok, rank %zu", rank);
  return ok;
}

// The implicit constraint kernels satisfy the transpose identity over 1000
// random trials up to six observers, and the weighted normal-matrix columns
// and diagonal match a dense reconstruction to 1e-12.
bool run_kernel_identities(std::string& detail) {
  constexpr double kAdjointTol = 1e-10;
  constexpr double kDenseTol = 1e-12;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  bool ok = true;

  double worst = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const ImplicitLp lp = ghz_lp(n, 90 + n);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(lp.cols()), y(lp.rows());
      for (double& v : x) v = gauss(rng);
      for (double& v : y) v = gauss(rng);
      const auto ax = lp.a_times_x(x);
      const auto aty = lp.at_times_y(y);
      double lhs = 0.0, rhs = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < y.size(); ++i) lhs += ax[i] * y[i];
      for (std::size_t j = 0; j < x.size(); ++j) rhs += aty[j] * x[j];
      for (std::size_t i = 0; i < y.size(); ++i) scale += std::abs(ax[i] * y[i]);
      const double err = std::abs(lhs - rhs) / scale;
      worst = std::max(worst, err);
      if (err > kAdjointTol) ok = false;
    }
  }

  double worst_dense = 0.0;
  for (int n : {2, 3}) {
    const ImplicitLp lp = ghz_lp(n, 80 + n);
    const reference::DenseLp dense = reference::materialize_dense(lp);
    const std::size_t m = lp.rows();
    std::vector<double> theta_v(lp.cols());
    for (double& v : theta_v) v = unit(rng);
    const ThetaDiag theta(theta_v);

    std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < lp.cols(); ++j) {
          sum += dense.at(i, j) * theta_v[j] * dense.at(k, j);
        }
        g[i][k] = sum;
      }
    }
    const auto diag = lp.diag_aat(theta);
    for (std::size_t i = 0; i < m; ++i) {
      const auto col = lp.col_aat(theta, i);
      if (diag[i] != col[i]) ok = false;
      for (std::size_t k = 0; k < m; ++k) {
        const double err = std::abs(col[k] - g[k][i]) / std::max(1.0, std::abs(g[k][i]));
        worst_dense = std::max(worst_dense, err);
        if (err > kDenseTol) ok = false;
      }
    }
  }
  detail = fmt("adjoint worst %.1e, dense worst %.1e", worst, worst_dense);
  return ok;
}

// When the factorization rank covers every row the preconditioner is the
// exact inverse, so every conjugate-gradient call finishes in one iteration.
bool run_direct_solve_mode(std::string& detail) {
  bool ok = true;
  for (int n : {2, 3, 4}) {
    const ImplicitLp lp = ghz_lp(n, 70 + n);
    const IpmResult r = ipm_solve(lp);  // default rank 100 >= 81 rows
    if (r.status != IpmStatus::Optimal) ok = false;
    int worst = 0;
    for (const IpmIterationStats& it : r.iterations_detail) {
      worst = std::max(worst, it.cg_iterations_max);
      if (it.cg_iterations_max != 1) ok = false;
    }
    detail += fmt("n=%d max/solve %d ", n, worst);
  }
  return ok;
}

// Index storage for the eight-observer system stays under 32 MiB and grows
// sublinearly in the dense entry count from five observers up.
bool run_memory_budget(std::string& detail) {
  constexpr std::size_t kBudget = 32ull << 20;
  bool ok = true;
  std::size_t prev_bytes = 0;
  double prev_entries = 0.0;
  std::size_t last_bytes = 0;
  for (int n = 5; n <= 8; ++n) {
    const ImplicitLp lp = ghz_lp(n, 60 + n);
    const double entries = double(lp.rows()) * double(lp.cols());
    if (prev_bytes > 0) {
      const double byte_ratio = double(lp.index_bytes()) / double(prev_bytes);
      const double entry_ratio = entries / prev_entries;
      if (byte_ratio >= entry_ratio) ok = false;
    }
    prev_bytes = lp.index_bytes();
    prev_entries = entries;
    last_bytes = lp.index_bytes();
  }
  if (last_bytes > kBudget) ok = false;
  detail = fmt("n=8 uses %.1f MiB", double(last_bytes) / double(1 << 20));
  return ok;
}

// Eight-observer minimization with a bounded factorization rank and a scaled
// objective lands in the expected band around the analytic value 2^-3.5.
bool run_large_reproduction(std::string& detail) {
  constexpr double kLow = 0.081;
  constexpr double kHigh = 0.10;
  const ExperimentConfig cfg = ExperimentConfig::two_setting_qubits(8);
  auto state = std::make_shared<const PureState>(make_ghz(8));

  IpmSettings ipm;
  ipm.chol_rank = 150;
  ipm.chol_rank_cap = 600;
  ipm.objective_scale = 8.0;

  DsmSettings dsm;
  dsm.ftol = 0.04;
  dsm.restarts = 1;
  dsm.rng_seed = 1;

  const auto start = Clock::now();
  const DsmResult r =
      dsm_minimize(critical_visibility_objective(state, cfg, SolverChoice::Ipm, ipm), cfg, dsm);
  detail = fmt("best %.4f in %.0fs (%ld solves)", r.best_value, seconds_since(start),
               r.evaluations);
  return r.best_value >= kLow && r.best_value <= kHigh;
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) full = true;
  }

  criterion("restart minimization matches the analytic sequence", run_restart_minimum);
  criterion("fixed-angle solves match the analytic sequence", run_fixed_angles);
  criterion("solvers agree on random instances", run_solver_crosscheck);
  criterion("row reduction keeps 3^n independent constraints", run_row_reduction);
  criterion("implicit kernels match their dense counterparts", run_kernel_identities);
  criterion("full-rank preconditioning solves each system in one step", run_direct_solve_mode);
  criterion("index storage stays within the memory budget", run_memory_budget);
  if (full) {
    criterion("eight-observer minimization reproduces the expected band", run_large_reproduction);
  } else {
    std::printf("[SKIP] eight-observer minimization reproduces the expected band: pass --full\n");
  }

  return g_failures == 0 ? 0 : 1;
}
