#include "bellvis/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellvis/errors.hpp"

namespace bellvis::reference {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum VarStatus : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

// Revised simplex working state: dense LU of the basis plus a product-form
// eta file between refactorizations.
class Solver {
 public:
  Solver(const DenseLp& lp, const SimplexSettings& st) : lp_(lp), st_(st) {
    m_ = lp.m;
    n_ = lp.n;
    ntot_ = n_ + m_;
    build_sparse_columns();

    lower_.assign(ntot_, 0.0);
    upper_.assign(ntot_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) upper_[j] = lp.u[j];
    for (std::size_t i = 0; i < m_; ++i) upper_[n_ + i] = kInf;

    art_sign_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) art_sign_[i] = lp.b[i] < 0.0 ? -1.0 : 1.0;

    vstat_.assign(ntot_, kAtLower);
    xval_.assign(ntot_, 0.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = static_cast<int>(n_ + i);
      vstat_[n_ + i] = kBasic;
    }
    max_iterations_ = st.max_iterations > 0
                          ? st.max_iterations
                          : static_cast<long>(100 * (m_ + n_) + 10000);
  }

  SimplexResult run() {
    SimplexResult result;
    refactorize();

    // Phase 1: maximize minus the artificial sum.
    obj_.assign(ntot_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) obj_[n_ + i] = -1.0;
    const SimplexStatus phase1 = iterate(result);
    if (phase1 != SimplexStatus::Optimal) {
      result.status = phase1 == SimplexStatus::Unbounded ? SimplexStatus::CyclingAbort : phase1;
      finish(result);
      return result;
    }
    double art_sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) art_sum += xval_[n_ + i];
    if (art_sum > 1e-8) {
      result.status = SimplexStatus::Infeasible;
      finish(result);
      return result;
    }

    // Phase 2: pin artificials at zero and switch to the real objective.
    for (std::size_t i = 0; i < m_; ++i) {
      upper_[n_ + i] = 0.0;
      if (vstat_[n_ + i] != kBasic) xval_[n_ + i] = 0.0;
    }
    obj_.assign(ntot_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = lp_.c[j];
    consecutive_degenerate_ = 0;
    bland_mode_ = false;

    result.status = iterate(result);
    finish(result);
    return result;
  }

 private:
  void build_sparse_columns() {
    col_start_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t nnz = 0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (lp_.at(i, j) != 0.0) ++nnz;
      }
      col_start_[j + 1] = col_start_[j] + nnz;
    }
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    for (std::size_t j = 0, p = 0; j < n_; ++j) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double v = lp_.at(i, j);
        if (v != 0.0) {
          col_row_[p] = static_cast<std::uint32_t>(i);
          col_val_[p] = v;
          ++p;
        }
      }
    }
  }

  // ----- factorization -----

  void refactorize() {
    lu_.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const int var = basis_[r];
      if (var >= static_cast<int>(n_)) {
        const std::size_t i = static_cast<std::size_t>(var) - n_;
        lu_[i * m_ + r] = art_sign_[i];
      } else {
        for (std::size_t p = col_start_[var]; p < col_start_[var + 1]; ++p) {
          lu_[col_row_[p] * m_ + r] = col_val_[p];
        }
      }
    }
    pivot_rows_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) {
      std::size_t best = k;
      double best_abs = std::abs(lu_[k * m_ + k]);
      for (std::size_t i = k + 1; i < m_; ++i) {
        const double v = std::abs(lu_[i * m_ + k]);
        if (v > best_abs) {
          best_abs = v;
          best = i;
        }
      }
      pivot_rows_[k] = static_cast<int>(best);
      if (best != k) {
        for (std::size_t j = 0; j < m_; ++j) std::swap(lu_[k * m_ + j], lu_[best * m_ + j]);
      }
      const double piv = lu_[k * m_ + k];
      if (piv == 0.0) throw NumericalError("singular basis matrix");
      const double inv = 1.0 / piv;
      for (std::size_t i = k + 1; i < m_; ++i) {
        const double f = lu_[i * m_ + k] * inv;
        if (f == 0.0) continue;
        lu_[i * m_ + k] = f;
        for (std::size_t j = k + 1; j < m_; ++j) lu_[i * m_ + j] -= f * lu_[k * m_ + j];
      }
    }
    etas_d_.clear();
    etas_r_.clear();
    recompute_basics();
  }

  void lu_solve(std::vector<double>& v) const {
    for (std::size_t k = 0; k < m_; ++k) {
      const int pr = pivot_rows_[k];
      if (pr != static_cast<int>(k)) std::swap(v[k], v[pr]);
    }
    for (std::size_t i = 1; i < m_; ++i) {
      double s = v[i];
      const double* row = &lu_[i * m_];
      for (std::size_t j = 0; j < i; ++j) s -= row[j] * v[j];
      v[i] = s;
    }
    for (std::size_t i = m_; i-- > 0;) {
      double s = v[i];
      const double* row = &lu_[i * m_];
      for (std::size_t j = i + 1; j < m_; ++j) s -= row[j] * v[j];
      v[i] = s / row[i];
    }
  }

  void lu_solve_transposed(std::vector<double>& v) const {
    // U^T w = v (forward), L^T z = w (backward), then undo row swaps.
    for (std::size_t i = 0; i < m_; ++i) {
      double s = v[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[j * m_ + i] * v[j];
      v[i] = s / lu_[i * m_ + i];
    }
    for (std::size_t i = m_; i-- > 0;) {
      double s = v[i];
      for (std::size_t j = i + 1; j < m_; ++j) s -= lu_[j * m_ + i] * v[j];
      v[i] = s;
    }
    for (std::size_t k = m_; k-- > 0;) {
      const int pr = pivot_rows_[k];
      if (pr != static_cast<int>(k)) std::swap(v[k], v[pr]);
    }
  }

  void ftran(std::vector<double>& v) const {
    lu_solve(v);
    for (std::size_t e = 0; e < etas_r_.size(); ++e) {
      const std::vector<double>& d = etas_d_[e];
      const int r = etas_r_[e];
      const double t = v[r] / d[r];
      if (t != 0.0) {
        for (std::size_t i = 0; i < m_; ++i) v[i] -= t * d[i];
      }
      v[r] = t;
    }
  }

  void btran(std::vector<double>& v) const {
    for (std::size_t e = etas_r_.size(); e-- > 0;) {
      const std::vector<double>& d = etas_d_[e];
      const int r = etas_r_[e];
      double dot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) dot += d[i] * v[i];
      v[r] += (v[r] - dot) / d[r];
    }
    lu_solve_transposed(v);
  }

  void column_of(int var, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (var >= static_cast<int>(n_)) {
      const std::size_t i = static_cast<std::size_t>(var) - n_;
      out[i] = art_sign_[i];
      return;
    }
    for (std::size_t p = col_start_[var]; p < col_start_[var + 1]; ++p) {
      out[col_row_[p]] = col_val_[p];
    }
  }

  void recompute_basics() {
    std::vector<double> rhs = lp_.b;
    for (std::size_t j = 0; j < ntot_; ++j) {
      if (vstat_[j] == kBasic) continue;
      const double xj = vstat_[j] == kAtUpper ? upper_[j] : lower_[j];
      xval_[j] = xj;
      if (xj == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= art_sign_[j - n_] * xj;
      } else {
        for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) {
          rhs[col_row_[p]] -= col_val_[p] * xj;
        }
      }
    }
    ftran(rhs);
    for (std::size_t r = 0; r < m_; ++r) xval_[basis_[r]] = rhs[r];
  }

  // ----- pricing -----

  double reduced_cost(int var, const std::vector<double>& y) const {
    double dot = 0.0;
    if (var >= static_cast<int>(n_)) {
      dot = art_sign_[var - static_cast<int>(n_)] * y[var - static_cast<int>(n_)];
    } else {
      for (std::size_t p = col_start_[var]; p < col_start_[var + 1]; ++p) {
        dot += col_val_[p] * y[col_row_[p]];
      }
    }
    return obj_[var] - dot;
  }

  // Selects the entering variable; returns -1 at optimality.  `direction`
  // is +1 when the entering variable increases from its lower bound.
  int choose_entering(const std::vector<double>& y, int* direction) const {
    int best = -1;
    double best_score = st_.dual_tol;
    for (std::size_t j = 0; j < ntot_; ++j) {
      if (vstat_[j] == kBasic) continue;
      if (lower_[j] == upper_[j]) continue;
      const double d = reduced_cost(static_cast<int>(j), y);
      double score = 0.0;
      int dir = 0;
      if (vstat_[j] == kAtLower && d > st_.dual_tol) {
        score = d;
        dir = 1;
      } else if (vstat_[j] == kAtUpper && d < -st_.dual_tol) {
        score = -d;
        dir = -1;
      } else {
        continue;
      }
      if (bland_mode_) {
        *direction = dir;
        return static_cast<int>(j);  // smallest eligible index
      }
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(j);
        *direction = dir;
      }
    }
    return best;
  }

  // ----- main loop -----

  SimplexStatus iterate(SimplexResult& result) {
    std::vector<double> y(m_), d(m_);
    while (true) {
      if (st_.deadline && std::chrono::steady_clock::now() > *st_.deadline) {
        result.deadline_exceeded = true;
        return SimplexStatus::CyclingAbort;
      }
      if (result.iterations >= max_iterations_) return SimplexStatus::CyclingAbort;

      for (std::size_t r = 0; r < m_; ++r) y[r] = obj_[basis_[r]];
      btran(y);
      int direction = 0;
      const int q = choose_entering(y, &direction);
      if (q < 0) return SimplexStatus::Optimal;

      column_of(q, d);
      ftran(d);

      // Ratio test over the basic variables plus the entering bound flip.
      // On ties a basic leave beats the flip only when strictly smaller;
      // among basic ties Bland mode takes the smallest variable index,
      // Dantzig mode the largest pivot magnitude.
      const double tie_eps = 1e-12;
      double best_t = upper_[q] < kInf ? upper_[q] - lower_[q] : kInf;
      int leaving_row = -1;      // -1 means bound flip
      int leaving_to_upper = 0;  // bound the leaving variable lands on
      double leaving_pivot = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double delta = direction * d[r];
        const int var = basis_[r];
        double t;
        int to_upper = 0;
        if (delta > st_.ratio_tol) {
          t = (xval_[var] - lower_[var]) / delta;
        } else if (delta < -st_.ratio_tol) {
          if (upper_[var] >= kInf) continue;
          t = (upper_[var] - xval_[var]) / (-delta);
          to_upper = 1;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        if (t >= best_t + tie_eps) continue;
        bool take;
        if (t < best_t - tie_eps) {
          take = true;
        } else if (leaving_row < 0) {
          take = false;  // tie with the bound flip: keep the flip
        } else if (bland_mode_) {
          take = var < basis_[leaving_row];
        } else {
          take = std::abs(delta) > std::abs(leaving_pivot);
        }
        if (take) {
          best_t = std::min(best_t, t);
          leaving_row = static_cast<int>(r);
          leaving_to_upper = to_upper;
          leaving_pivot = delta;
        }
      }

      if (best_t >= kInf) return SimplexStatus::Unbounded;

      ++result.iterations;
      const bool degenerate = best_t <= st_.ratio_tol;
      if (degenerate) {
        if (++consecutive_degenerate_ > bland_threshold()) bland_mode_ = true;
      } else {
        consecutive_degenerate_ = 0;
        bland_mode_ = false;
      }

      // Move the entering variable and shift the basic values.
      const double step = best_t;
      if (step != 0.0) {
        for (std::size_t r = 0; r < m_; ++r) {
          xval_[basis_[r]] -= step * direction * d[r];
        }
      }
      if (leaving_row < 0) {
        // Bound flip: entering variable crosses to its other bound.
        vstat_[q] = vstat_[q] == kAtLower ? kAtUpper : kAtLower;
        xval_[q] = vstat_[q] == kAtUpper ? upper_[q] : lower_[q];
        continue;
      }

      const int leaving_var = basis_[leaving_row];
      xval_[q] = (vstat_[q] == kAtLower ? lower_[q] + step : upper_[q] - step);
      xval_[leaving_var] = leaving_to_upper ? upper_[leaving_var] : lower_[leaving_var];
      vstat_[leaving_var] = leaving_to_upper ? kAtUpper : kAtLower;
      vstat_[q] = kBasic;
      basis_[leaving_row] = q;

      etas_d_.push_back(d);
      etas_r_.push_back(leaving_row);
      if (static_cast<int>(etas_r_.size()) >= st_.refactor_interval) refactorize();
    }
  }

  long bland_threshold() const { return static_cast<long>(10 * (m_ + n_)); }

  void finish(SimplexResult& result) {
    result.basis = basis_;
    result.x.assign(xval_.begin(), xval_.begin() + n_);
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += lp_.c[j] * result.x[j];
    result.objective = obj;
    double res = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n_; ++j) ax += lp_.at(i, j) * result.x[j];
      // artificials participate in Ax = b while nonzero
      ax += art_sign_[i] * xval_[n_ + i];
      res = std::max(res, std::abs(ax - lp_.b[i]));
    }
    result.primal_residual = res;
  }

  const DenseLp& lp_;
  SimplexSettings st_;
  std::size_t m_ = 0, n_ = 0, ntot_ = 0;

  std::vector<std::size_t> col_start_;
  std::vector<std::uint32_t> col_row_;
  std::vector<double> col_val_;

  std::vector<double> lower_, upper_, obj_, xval_;
  std::vector<double> art_sign_;
  std::vector<int> basis_;
  std::vector<std::uint8_t> vstat_;

  std::vector<double> lu_;
  std::vector<int> pivot_rows_;
  std::vector<std::vector<double>> etas_d_;
  std::vector<int> etas_r_;

  long consecutive_degenerate_ = 0;
  bool bland_mode_ = false;
  long max_iterations_ = 0;
};

}  // namespace

SimplexResult simplex_solve(const DenseLp& lp, const SimplexSettings& settings) {
  if (lp.m == 0 || lp.n == 0 || lp.a.size() != lp.m * lp.n || lp.b.size() != lp.m ||
      lp.c.size() != lp.n || lp.u.size() != lp.n) {
    throw ShapeError("malformed dense LP");
  }
  if (lp.m > kOracleRowCap) throw SizeCapError("simplex oracle row cap exceeded");
  for (double uj : lp.u) {
    if (!(uj >= 0.0)) throw ConfigError("upper bounds must be nonnegative");
  }
  Solver solver(lp, settings);
  return solver.run();
}

}  // namespace bellvis::reference
