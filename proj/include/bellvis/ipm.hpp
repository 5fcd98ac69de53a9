#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "bellvis/implicit_lp.hpp"

namespace bellvis {

struct CgSchedule {
  int initial = 100;   // per-solve iteration limit while mu >= 1e-2 (and <= m)
  double growth = 2.0; // limit multiplier per decade of mu below 1e-2
  int cap = 1000;
};

struct IpmSettings {
  double epsilon = 1e-5;        // relative duality-gap stop
  double eps_cg = 1e-6;         // PCG relative residual tolerance floor
  int chol_rank = 100;          // partial Cholesky pivot count
  int chol_rank_cap = 2048;     // stagnation response may grow the rank up to
                                // min(cap, m); never below chol_rank
  CgSchedule cg_schedule;
  double reg_scale = 1e-4;      // regularization = max(reg_scale*mu, reg_floor)
  double reg_floor = 1e-10;
  int max_ipm_iters = 200;
  double objective_scale = 1.0; // multiplies c internally, divided back out
  std::ostream* trace = nullptr;  // per-iteration CSV when set
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Primal-dual iterate for min c^T x, A x = b, 0 <= x <= u (the solver feeds
// in the negated visibility objective): s pairs with the lower bounds, w with
// the upper bounds, A^T y + s - w = c and
// theta_j = 1 / (s_j/x_j + w_j/(u_j - x_j)).
struct IpmState {
  std::vector<double> x, y, s, w;
  std::vector<double> reg_primal;  // R_p, per column
  std::vector<double> reg_dual;    // R_d, per row
  ThetaDiag theta;
  double mu = 0.0;

  static IpmState initial(const ImplicitLp&, const IpmSettings&);
  // Recomputes theta and mu from the current iterate.
  void refresh(const ImplicitLp&);
};

// Rank-k partial Cholesky of G_R = A ThetaR A^T + R_d with greedy
// largest-pivot selection: G_R ~ P^T [L11; L21] D_L [L11; L21]^T P plus the
// Schur-complement diagonal D_S on the unpivoted block.
struct PartialCholesky {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> pivot_order;   // k row indices, selection order
  std::vector<double> l;                    // m*k column-major, original row ids
  std::vector<double> d_l;                  // k pivot values
  std::vector<double> schur_diag;           // m entries; 1.0 placeholders on pivots
  std::vector<std::uint8_t> is_pivot;

  std::vector<double> schur_diag_compressed() const;  // the m-k live entries
};

// Exactly k col_aat fetches and one diag_aat evaluation.
PartialCholesky partial_cholesky(const ImplicitLp&, const ThetaDiag& theta,
                                 std::span<const double> reg_primal,
                                 std::span<const double> reg_dual, int rank);

// z = P^{-1} r for the factor above; O(m*k).
void apply_preconditioner(const PartialCholesky&, std::span<const double> r,
                          std::span<double> z);
std::vector<double> apply_preconditioner(const PartialCholesky&, std::span<const double> r);

struct PcgResult {
  std::vector<double> dy;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients on (A ThetaR A^T + R_d) dy = g where
// ThetaR = (Theta^-1 + R_p)^-1; the operator is applied through the kernels.
PcgResult pcg_solve(const ImplicitLp&, const ThetaDiag& theta,
                    std::span<const double> reg_primal, std::span<const double> reg_dual,
                    const PartialCholesky&, std::span<const double> g, double tol,
                    int max_iters);

// Newton right-hand sides: primal b - Ax, dual c - A^T y - s + w, and the
// two complementarity targets (lower pairs x s, upper pairs (u - x) w).
struct NewtonRhs {
  std::vector<double> primal;      // m
  std::vector<double> dual;        // n
  std::vector<double> comp_lower;  // n
  std::vector<double> comp_upper;  // n
};

struct Direction {
  std::vector<double> dx, dy, ds, dw;
  int cg_iterations = 0;
  double cg_residual = 0.0;
  bool ok = false;
};

Direction compute_direction(const ImplicitLp&, const IpmState&, const NewtonRhs&,
                            const PartialCholesky&, const IpmSettings&);
// Convenience overload that builds the factor itself.
Direction compute_direction(const ImplicitLp&, const IpmState&, const NewtonRhs&,
                            const IpmSettings&);

enum class IpmStatus { Optimal, IterationLimit, NumericalFailure };

struct IpmIterationStats {
  int iteration = 0;
  double mu = 0.0;
  double gap = 0.0;
  int cg_iterations = 0;      // predictor + corrector
  int cg_iterations_max = 0;  // largest single PCG call this iteration
  double cg_residual = 0.0;
  double step = 0.0;
};

struct IpmResult {
  double objective = 0.0;
  IpmStatus status = IpmStatus::NumericalFailure;
  int ipm_iterations = 0;
  long total_cg_iterations = 0;
  double final_gap = 0.0;
  bool deadline_exceeded = false;
  std::vector<IpmIterationStats> iterations_detail;
};

IpmResult ipm_solve(const ImplicitLp&, const IpmSettings& = {});

}  // namespace bellvis
