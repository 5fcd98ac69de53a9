#include "bellvis/implicit_lp.hpp"

#include <cmath>
#include <limits>

#include "bellvis/errors.hpp"

namespace bellvis {

ThetaDiag::ThetaDiag(std::vector<double> v) : values(std::move(v)) {
  for (double x : values) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("theta entries must be positive");
  }
}

ThetaDiag ThetaDiag::ones(std::size_t n) { return ThetaDiag(std::vector<double>(n, 1.0)); }

ImplicitLp::ImplicitLp(const ExperimentConfig& config) : config_(config) {}

std::span<const std::uint32_t> ImplicitLp::row_cols(std::size_t row) const {
  return {rows_by_index_.data() + row * row_nnz_, row_nnz_};
}

std::span<const std::uint32_t> ImplicitLp::col_rows(std::size_t col) const {
  return {cols_by_index_.data() + col_ptr_[col],
          static_cast<std::size_t>(col_ptr_[col + 1] - col_ptr_[col])};
}

std::vector<double> ImplicitLp::objective() const {
  std::vector<double> c(n_cols_, 0.0);
  c[vis_col()] = 1.0;
  return c;
}

RowId ImplicitLp::row_id(std::size_t row) const {
  return RowId{decode_settings_choice(config_, row_settings_[row]),
               decode_outcomes(config_, row_outcomes_[row])};
}

void ImplicitLp::a_times_x(std::span<const double> x, std::span<double> out) const {
  if (x.size() != n_cols_ || out.size() != m_) throw ShapeError("a_times_x size mismatch");
  const double xv = x[vis_col()];
  for (std::size_t i = 0; i < m_; ++i) {
    double s = 0.0;
    for (std::uint32_t k : row_cols(i)) s += x[k];
    out[i] = s + last_column_[i] * xv;
  }
}

void ImplicitLp::at_times_y(std::span<const double> y, std::span<double> out) const {
  if (y.size() != m_ || out.size() != n_cols_) throw ShapeError("at_times_y size mismatch");
  const std::size_t na = assignment_cols();
  for (std::size_t j = 0; j < na; ++j) {
    double s = 0.0;
    for (std::uint32_t i : col_rows(j)) s += y[i];
    out[j] = s;
  }
  double sv = 0.0;
  for (std::size_t i = 0; i < m_; ++i) sv += last_column_[i] * y[i];
  out[vis_col()] = sv;
}

void ImplicitLp::col_aat(const ThetaDiag& theta, std::size_t row, std::span<double> out) const {
  if (theta.values.size() != n_cols_ || out.size() != m_) throw ShapeError("col_aat size mismatch");
  if (row >= m_) throw ShapeError("col_aat row out of range");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::uint32_t k : row_cols(row)) {
    const double tk = theta.values[k];
    for (std::uint32_t i : col_rows(k)) out[i] += tk;
  }
  const double tv = theta.values[vis_col()] * last_column_[row];
  for (std::size_t i = 0; i < m_; ++i) out[i] += tv * last_column_[i];
}

void ImplicitLp::diag_aat(const ThetaDiag& theta, std::span<double> out) const {
  if (theta.values.size() != n_cols_ || out.size() != m_) throw ShapeError("diag_aat size mismatch");
  for (std::size_t i = 0; i < m_; ++i) {
    double s = 0.0;
    for (std::uint32_t k : row_cols(i)) s += theta.values[k];
    const double tv = theta.values[vis_col()] * last_column_[i];
    out[i] = s + tv * last_column_[i];
  }
}

std::vector<double> ImplicitLp::a_times_x(std::span<const double> x) const {
  std::vector<double> out(m_);
  a_times_x(x, out);
  return out;
}

std::vector<double> ImplicitLp::at_times_y(std::span<const double> y) const {
  std::vector<double> out(n_cols_);
  at_times_y(y, out);
  return out;
}

std::vector<double> ImplicitLp::col_aat(const ThetaDiag& theta, std::size_t row) const {
  std::vector<double> out(m_);
  col_aat(theta, row, out);
  return out;
}

std::vector<double> ImplicitLp::diag_aat(const ThetaDiag& theta) const {
  std::vector<double> out(m_);
  diag_aat(theta, out);
  return out;
}

std::size_t ImplicitLp::index_bytes() const {
  return rows_by_index_.size() * sizeof(std::uint32_t) +
         cols_by_index_.size() * sizeof(std::uint32_t) +
         col_ptr_.size() * sizeof(std::uint64_t) + last_column_.size() * sizeof(double) +
         (row_settings_.size() + row_outcomes_.size()) * sizeof(std::uint32_t);
}

ImplicitLp build_lp(const ExperimentConfig& config, const ProbabilityTable& table) {
  if (!(table.config() == config)) {
    throw ConfigError("probability table was built for a different experiment");
  }
  const std::uint64_t n_assign = config.assignment_count();
  if (n_assign + 1 > std::numeric_limits<std::uint32_t>::max()) {
    throw SizeCapError("too many assignment columns for 32-bit indices");
  }

  ImplicitLp lp(config);
  lp.m_ = static_cast<std::size_t>(config.reduced_row_count());
  lp.n_cols_ = static_cast<std::size_t>(n_assign) + 1;
  lp.rhs_value_ = 1.0 / static_cast<double>(config.state_dim());

  const int n = config.observers();
  const int d = config.outcomes();

  // Digit weights of the assignment code, observer 1 observable 1 most
  // significant.  weight[j][t] multiplies the digit for (observer j,
  // observable t+1).
  std::vector<std::vector<std::uint64_t>> weight(n);
  {
    std::uint64_t w = 1;
    for (int j = n - 1; j >= 0; --j) {
      const int mj = config.observables_for(j);
      weight[j].resize(mj);
      for (int t = mj - 1; t >= 0; --t) {
        weight[j][t] = w;
        w *= static_cast<std::uint64_t>(d);
      }
    }
  }

  std::size_t row_nnz = 1;
  for (int j = 0; j < n; ++j) {
    std::size_t f = 1;
    for (int t = 0; t < config.observables_for(j) - 1; ++t) f *= static_cast<std::size_t>(d);
    row_nnz *= f;
  }
  lp.row_nnz_ = row_nnz;

  lp.rows_by_index_.resize(lp.m_ * row_nnz);
  lp.last_column_.resize(lp.m_);
  lp.row_settings_.resize(lp.m_);
  lp.row_outcomes_.resize(lp.m_);

  // Free digit weights in most-significant-first order; counting through
  // them in mixed radix base d enumerates each row's columns ascending.
  std::vector<std::uint64_t> free_weights;
  free_weights.reserve(static_cast<std::size_t>(config.settings_total()));

  std::size_t row = 0;
  for_each_reduced_row(config, [&](std::uint32_t oc, std::uint32_t rc,
                                   std::span<const int> choice, std::span<const int> outs) {
    std::uint64_t base = 0;
    free_weights.clear();
    for (int j = 0; j < n; ++j) {
      const int mj = config.observables_for(j);
      for (int t = 0; t < mj; ++t) {
        if (t + 1 == choice[j]) {
          base += weight[j][t] * static_cast<std::uint64_t>(outs[j]);
        } else {
          free_weights.push_back(weight[j][t]);
        }
      }
    }
    std::uint32_t* dest = lp.rows_by_index_.data() + row * row_nnz;
    for (std::size_t cnt = 0; cnt < row_nnz; ++cnt) {
      std::uint64_t col = base;
      std::size_t rest = cnt;
      for (std::size_t f = free_weights.size(); f-- > 0;) {
        col += free_weights[f] * static_cast<std::uint64_t>(rest % d);
        rest /= static_cast<std::size_t>(d);
      }
      dest[cnt] = static_cast<std::uint32_t>(col);
    }

    lp.row_settings_[row] = oc;
    lp.row_outcomes_[row] = rc;
    lp.last_column_[row] = lp.rhs_value_ - table.at(oc, rc);
    ++row;
  });
  if (row != lp.m_) throw NumericalError("reduced row enumeration mismatch");

  // Transpose adjacency by counting sort; scanning rows in order leaves each
  // column's row list sorted.
  lp.col_ptr_.assign(lp.n_cols_, 0);  // one slot per assignment column + end
  for (std::uint32_t col : lp.rows_by_index_) lp.col_ptr_[col + 1] += 1;
  for (std::size_t j = 1; j < lp.col_ptr_.size(); ++j) lp.col_ptr_[j] += lp.col_ptr_[j - 1];
  lp.cols_by_index_.resize(lp.rows_by_index_.size());
  std::vector<std::uint64_t> cursor(lp.col_ptr_.begin(), lp.col_ptr_.end() - 1);
  for (std::size_t i = 0; i < lp.m_; ++i) {
    for (std::uint32_t col : lp.row_cols(i)) {
      lp.cols_by_index_[cursor[col]++] = static_cast<std::uint32_t>(i);
    }
  }
  return lp;
}

}  // namespace bellvis
