#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bellvis/implicit_lp.hpp"

namespace bellvis::reference {

// Explicit row-major copy of an LP: maximize c^T x, A x = b, 0 <= x <= u.
struct DenseLp {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a;  // row-major, m * n
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> u;

  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline constexpr std::size_t kDenseEntryCap = 10'000'000;

// Expands the implicit storage; refuses above kDenseEntryCap entries.
DenseLp materialize_dense(const ImplicitLp&);

// Independent dense construction straight from the marginal equations,
// bypassing ImplicitLp; cross-checks the implicit builder in tests.
DenseLp dense_from_marginals(const ExperimentConfig&, const ProbabilityTable&);

// Rank of the constraint matrix by column-pivoted elimination.
std::size_t dense_rank(std::span<const double> row_major, std::size_t m, std::size_t n,
                       double tol = 1e-9);

inline constexpr std::size_t kOracleRowCap = 3000;

// Solves (A ThetaR A^T + R_d) dy = g densely, ThetaR = (Theta^-1 + R_p)^-1,
// as an oracle for the matrix-free conjugate-gradient path.
std::vector<double> dense_direction_oracle(const ImplicitLp&, const ThetaDiag& theta,
                                           std::span<const double> reg_primal,
                                           std::span<const double> reg_dual,
                                           std::span<const double> g);

}  // namespace bellvis::reference
