#pragma once

// Sparse storage formats: canonical CSR, block CSR (fixed b_row x b_col
// tiles) and window CSR (fixed-height row windows holding the union of their
// nonzero columns, padded to a multiple of b_col).

#include <cstddef>
#include <span>
#include <vector>

#include "sparselab/types.hpp"

namespace sparselab {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(index_t n_rows, index_t n_cols, double fill = 0.0);
  DenseMatrix(index_t n_rows, index_t n_cols, std::vector<double> values);

  static DenseMatrix identity(index_t n);

  index_t n_rows() const { return n_rows_; }
  index_t n_cols() const { return n_cols_; }

  double& operator()(index_t i, index_t j) { return values_[static_cast<std::size_t>(i * n_cols_ + j)]; }
  double operator()(index_t i, index_t j) const { return values_[static_cast<std::size_t>(i * n_cols_ + j)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> row(index_t i) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(i * n_cols_),
                                                    static_cast<std::size_t>(n_cols_));
  }
  std::span<double> row(index_t i) {
    return std::span<double>(values_).subspan(static_cast<std::size_t>(i * n_cols_),
                                              static_cast<std::size_t>(n_cols_));
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  std::vector<double> values_;
};

struct Triplet {
  index_t row;
  index_t col;
  double value;
};

/// Canonical CSR: sorted, duplicate-free column indices and no stored zeros.
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_{0} {}

  /// Takes ownership of already-canonical arrays; throws CorruptFormatError
  /// when any canonical invariant is violated.
  CsrMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> row_ptr, std::vector<index_t> col_idx,
            std::vector<double> values);

  /// Sorts, sums duplicates and drops zeros. Throws std::invalid_argument on
  /// out-of-range coordinates.
  static CsrMatrix from_triplets(index_t n_rows, index_t n_cols, std::vector<Triplet> entries);
  static CsrMatrix from_dense(const DenseMatrix& a);

  index_t n_rows() const { return n_rows_; }
  index_t n_cols() const { return n_cols_; }
  index_t nnz() const { return static_cast<index_t>(col_idx_.size()); }

  std::span<const index_t> row_ptr() const { return row_ptr_; }
  std::span<const index_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  std::vector<Triplet> triplets() const;
  DenseMatrix to_dense() const;

  bool operator==(const CsrMatrix&) const = default;

 private:
  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  std::vector<index_t> row_ptr_;
  std::vector<index_t> col_idx_;
  std::vector<double> values_;
};

/// Block CSR. Dimensions that are not block multiples are logically
/// zero-padded; m() and k() keep the original shape.
class BcsrMatrix {
 public:
  BcsrMatrix(index_t m, index_t k, index_t b_row, index_t b_col, std::vector<index_t> block_row_ptr,
             std::vector<index_t> block_col_idx, std::vector<double> blocks, index_t nnz_original);

  index_t m() const { return m_; }
  index_t k() const { return k_; }
  index_t b_row() const { return b_row_; }
  index_t b_col() const { return b_col_; }
  index_t block_rows() const { return static_cast<index_t>(block_row_ptr_.size()) - 1; }
  index_t block_cols() const { return ceil_div(k_, b_col_); }
  index_t nnz_blocks() const { return static_cast<index_t>(block_col_idx_.size()); }
  index_t nnz_original() const { return nnz_original_; }
  index_t block_size() const { return b_row_ * b_col_; }

  std::span<const index_t> block_row_ptr() const { return block_row_ptr_; }
  std::span<const index_t> block_col_idx() const { return block_col_idx_; }
  std::span<const double> blocks() const { return blocks_; }
  /// Row-major values of stored block `b`.
  std::span<const double> block(index_t b) const {
    return std::span<const double>(blocks_).subspan(static_cast<std::size_t>(b * block_size()),
                                                    static_cast<std::size_t>(block_size()));
  }
  index_t blocks_in_row(index_t block_row) const {
    return block_row_ptr_[static_cast<std::size_t>(block_row) + 1] - block_row_ptr_[static_cast<std::size_t>(block_row)];
  }

  bool operator==(const BcsrMatrix&) const = default;

 private:
  index_t m_;
  index_t k_;
  index_t b_row_;
  index_t b_col_;
  std::vector<index_t> block_row_ptr_;
  std::vector<index_t> block_col_idx_;
  std::vector<double> blocks_;
  index_t nnz_original_;
};

/// Window CSR. Each window of b_row rows stores the sorted union of its
/// nonzero columns, padded with sentinel columns to a multiple of b_col.
/// Values are stored per packed column: b_row contiguous entries each.
class WcsrMatrix {
 public:
  static constexpr index_t kSentinel = -1;

  WcsrMatrix(index_t m, index_t k, index_t b_row, index_t b_col, std::vector<index_t> window_row_ptr,
             std::vector<index_t> window_col_idx, std::vector<double> values, index_t nnz_original);

  index_t m() const { return m_; }
  index_t k() const { return k_; }
  index_t b_row() const { return b_row_; }
  index_t b_col() const { return b_col_; }
  index_t windows() const { return static_cast<index_t>(window_row_ptr_.size()) - 1; }
  index_t padded_nnz_cols() const { return static_cast<index_t>(window_col_idx_.size()); }
  index_t nnz_original() const { return nnz_original_; }

  std::span<const index_t> window_row_ptr() const { return window_row_ptr_; }
  std::span<const index_t> window_col_idx() const { return window_col_idx_; }
  std::span<const double> values() const { return values_; }

  index_t window_begin(index_t w) const { return window_row_ptr_[static_cast<std::size_t>(w)]; }
  index_t window_cols(index_t w) const {
    return window_row_ptr_[static_cast<std::size_t>(w) + 1] - window_row_ptr_[static_cast<std::size_t>(w)];
  }
  /// The b_row values of packed column `p` (global packed position).
  std::span<const double> column_vector(index_t p) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(p * b_row_),
                                                    static_cast<std::size_t>(b_row_));
  }

  bool operator==(const WcsrMatrix&) const = default;

 private:
  index_t m_;
  index_t k_;
  index_t b_row_;
  index_t b_col_;
  std::vector<index_t> window_row_ptr_;
  std::vector<index_t> window_col_idx_;
  std::vector<double> values_;
  index_t nnz_original_;
};

/// Maps old index i to new index order()[i].
class Permutation {
 public:
  Permutation() = default;
  /// Throws std::invalid_argument unless `new_of_old` is a bijection of [0, n).
  explicit Permutation(std::vector<index_t> new_of_old);

  static Permutation identity(index_t n);
  /// Builds the permutation from a visit sequence: sequence[new] = old.
  static Permutation from_sequence(std::span<const index_t> sequence);

  index_t size() const { return static_cast<index_t>(order_.size()); }
  index_t operator()(index_t old_index) const { return order_[static_cast<std::size_t>(old_index)]; }
  std::span<const index_t> order() const { return order_; }
  Permutation inverse() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<index_t> order_;
};

enum class PermuteAxes { rows, cols, both };

BcsrMatrix bcsr_from_csr(const CsrMatrix& a, index_t b_row, index_t b_col);
CsrMatrix bcsr_to_csr(const BcsrMatrix& a);

WcsrMatrix wcsr_from_csr(const CsrMatrix& a, index_t b_row, index_t b_col);
CsrMatrix wcsr_to_csr(const WcsrMatrix& a);

/// nnz_original / (nnz_blocks * b_row * b_col). Throws UndefinedMetricError
/// when no block is stored.
double fill_ratio(const BcsrMatrix& a);

/// Fraction of packed columns that are sentinels. Throws UndefinedMetricError
/// when there are no packed columns.
double wcsr_padding_ratio(const WcsrMatrix& a);

/// Packed (padded) column count of every window.
std::vector<index_t> window_column_counts(const WcsrMatrix& a);

/// Reverse Cuthill-McKee on the symmetrized pattern of a square matrix.
Permutation rcm_permutation(const CsrMatrix& a);

CsrMatrix apply_permutation(const CsrMatrix& a, const Permutation& p, PermuteAxes axes);

/// max |i - j| over stored entries; 0 for an empty matrix.
index_t bandwidth(const CsrMatrix& a);

}  // namespace sparselab
