#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bellvis/experiment.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/rows.hpp"

namespace bellvis {

// Positive diagonal scaling used by the normal-equations kernels; one entry
// per LP column including the visibility column.
struct ThetaDiag {
  std::vector<double> values;

  explicit ThetaDiag(std::vector<double> v);
  static ThetaDiag ones(std::size_t n);
};

// Local-model feasibility LP, stored implicitly:
//
//   maximize x[vis]  s.t.  A x = b,  0 <= x <= 1
//
// Row i pairs a settings choice with an outcome tuple.  Each structural
// entry of A is exactly 1, so only column indices are kept, row-wise and
// column-wise (exact transposes of each other).  The single dense column is
// the visibility column d^-n - P(r|o); b is d^-n throughout.
class ImplicitLp {
 public:
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_cols_; }          // assignments + 1
  std::size_t assignment_cols() const { return n_cols_ - 1; }
  std::size_t vis_col() const { return n_cols_ - 1; }
  std::size_t row_nnz() const { return row_nnz_; }      // structural ones per row

  std::span<const std::uint32_t> row_cols(std::size_t row) const;
  std::span<const std::uint32_t> col_rows(std::size_t col) const;
  const std::vector<double>& last_column() const { return last_column_; }

  double rhs_value() const { return rhs_value_; }
  std::vector<double> rhs() const { return std::vector<double>(m_, rhs_value_); }
  std::vector<double> objective() const;     // unit weight on the visibility column
  std::vector<double> upper_bounds() const { return std::vector<double>(n_cols_, 1.0); }

  std::uint32_t row_settings_code(std::size_t row) const { return row_settings_[row]; }
  std::uint32_t row_outcome_code(std::size_t row) const { return row_outcomes_[row]; }
  RowId row_id(std::size_t row) const;

  const ExperimentConfig& config() const { return config_; }

  // out = A x
  void a_times_x(std::span<const double> x, std::span<double> out) const;
  // out = A^T y
  void at_times_y(std::span<const double> y, std::span<double> out) const;
  // out = A (theta ∘ row_i(A)), one full column of A Theta A^T
  void col_aat(const ThetaDiag& theta, std::size_t row, std::span<double> out) const;
  // out[i] = sum_{k in row i} theta[k] + theta[vis] * last_column[i]^2;
  // summation order matches col_aat so diag_aat[i] == col_aat(i)[i] exactly
  void diag_aat(const ThetaDiag& theta, std::span<double> out) const;

  std::vector<double> a_times_x(std::span<const double> x) const;
  std::vector<double> at_times_y(std::span<const double> y) const;
  std::vector<double> col_aat(const ThetaDiag& theta, std::size_t row) const;
  std::vector<double> diag_aat(const ThetaDiag& theta) const;

  // Bytes spent on index storage plus the dense column; the quantity the
  // sub-linear memory-growth check measures.
  std::size_t index_bytes() const;

  friend ImplicitLp build_lp(const ExperimentConfig&, const ProbabilityTable&);

 private:
  ImplicitLp(const ExperimentConfig& config);

  ExperimentConfig config_;
  std::size_t m_ = 0;
  std::size_t n_cols_ = 0;
  std::size_t row_nnz_ = 0;
  double rhs_value_ = 0.0;
  std::vector<std::uint32_t> rows_by_index_;   // m_ * row_nnz_, sorted per row
  std::vector<std::uint64_t> col_ptr_;         // assignment columns + 1
  std::vector<std::uint32_t> cols_by_index_;   // transpose adjacency
  std::vector<double> last_column_;
  std::vector<std::uint32_t> row_settings_;
  std::vector<std::uint32_t> row_outcomes_;
};

// Builds the reduced LP; throws TableError if the table lacks a needed entry.
ImplicitLp build_lp(const ExperimentConfig&, const ProbabilityTable&);

}  // namespace bellvis
