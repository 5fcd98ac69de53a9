#include "bellvis/dense.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "bellvis/errors.hpp"
#include "bellvis/rows.hpp"

namespace bellvis::reference {

DenseLp materialize_dense(const ImplicitLp& lp) {
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  if (m * n > kDenseEntryCap) {
    throw SizeCapError("dense materialization would exceed the entry cap");
  }
  DenseLp dense;
  dense.m = m;
  dense.n = n;
  dense.a.assign(m * n, 0.0);
  dense.b = lp.rhs();
  dense.c = lp.objective();
  dense.u = lp.upper_bounds();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::uint32_t k : lp.row_cols(i)) dense.at(i, k) = 1.0;
    dense.at(i, lp.vis_col()) = lp.last_column()[i];
  }
  return dense;
}

DenseLp dense_from_marginals(const ExperimentConfig& config, const ProbabilityTable& table) {
  const std::size_t m = static_cast<std::size_t>(config.reduced_row_count());
  const std::size_t n_assign = static_cast<std::size_t>(config.assignment_count());
  const std::size_t n = n_assign + 1;
  if (m * n > kDenseEntryCap) {
    throw SizeCapError("dense materialization would exceed the entry cap");
  }
  const double inv_dn = 1.0 / static_cast<double>(config.state_dim());

  DenseLp dense;
  dense.m = m;
  dense.n = n;
  dense.a.assign(m * n, 0.0);
  dense.b.assign(m, inv_dn);
  dense.c.assign(n, 0.0);
  dense.c[n - 1] = 1.0;
  dense.u.assign(n, 1.0);

  // Assignment column `a` contributes to row (o, r) iff the assignment
  // answers r_j for every observer's chosen observable o_j.  Decoded here
  // digit by digit, independent of the implicit builder's index math.
  const int nobs = config.observers();
  const int d = config.outcomes();
  std::size_t row = 0;
  for_each_reduced_row(config, [&](std::uint32_t oc, std::uint32_t rc,
                                   std::span<const int> choice, std::span<const int> outs) {
    for (std::size_t col = 0; col < n_assign; ++col) {
      std::uint64_t rest = col;
      bool hit = true;
      for (int j = nobs - 1; j >= 0; --j) {
        const int mj = config.observables_for(j);
        for (int t = mj; t >= 1; --t) {
          const int digit = static_cast<int>(rest % static_cast<std::uint64_t>(d));
          rest /= static_cast<std::uint64_t>(d);
          if (t == choice[j] && digit != outs[j]) hit = false;
        }
      }
      if (hit) dense.at(row, col) = 1.0;
    }
    dense.at(row, n - 1) = inv_dn - table.at(oc, rc);
    ++row;
  });
  return dense;
}

std::size_t dense_rank(std::span<const double> row_major, std::size_t m, std::size_t n,
                       double tol) {
  Eigen::MatrixXd a(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * n + j];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(tol);
  return static_cast<std::size_t>(lu.rank());
}

std::vector<double> dense_direction_oracle(const ImplicitLp& lp, const ThetaDiag& theta,
                                           std::span<const double> reg_primal,
                                           std::span<const double> reg_dual,
                                           std::span<const double> g) {
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  if (m > kOracleRowCap) throw SizeCapError("dense direction oracle row cap exceeded");
  if (theta.values.size() != n || reg_primal.size() != n || reg_dual.size() != m ||
      g.size() != m) {
    throw ShapeError("dense direction oracle size mismatch");
  }
  const DenseLp dense = materialize_dense(lp);
  Eigen::MatrixXd a(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dense.at(i, j);
  }
  Eigen::VectorXd theta_r(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta_r(static_cast<Eigen::Index>(j)) = 1.0 / (1.0 / theta.values[j] + reg_primal[j]);
  }
  Eigen::MatrixXd normal = a * theta_r.asDiagonal() * a.transpose();
  for (std::size_t i = 0; i < m; ++i) normal(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += reg_dual[i];
  Eigen::VectorXd rhs(m);
  for (std::size_t i = 0; i < m; ++i) rhs(static_cast<Eigen::Index>(i)) = g[i];
  Eigen::VectorXd dy = Eigen::LLT<Eigen::MatrixXd>(normal).solve(rhs);
  return std::vector<double>(dy.data(), dy.data() + m);
}

}  // namespace bellvis::reference
