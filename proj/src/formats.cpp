#include "sparselab/formats.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

namespace sparselab {

namespace {

void require_block_dims(index_t b_row, index_t b_col) {
  if (b_row < 1 || b_col < 1) {
    throw std::invalid_argument("block dimensions must be >= 1 (got " + std::to_string(b_row) + "x" +
                                std::to_string(b_col) + ")");
  }
}

void check_offsets(std::span<const index_t> ptr, std::size_t expected_len, std::size_t total, const char* what) {
  if (ptr.size() != expected_len) {
    throw CorruptFormatError(std::string(what) + ": wrong length");
  }
  if (ptr.front() != 0 || static_cast<std::size_t>(ptr.back()) != total) {
    throw CorruptFormatError(std::string(what) + ": must start at 0 and end at the entry count");
  }
  for (std::size_t i = 1; i < ptr.size(); ++i) {
    if (ptr[i] < ptr[i - 1]) throw CorruptFormatError(std::string(what) + ": not non-decreasing");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(index_t n_rows, index_t n_cols, double fill)
    : n_rows_(n_rows), n_cols_(n_cols), values_(static_cast<std::size_t>(n_rows * n_cols), fill) {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative dense dimensions");
}

DenseMatrix::DenseMatrix(index_t n_rows, index_t n_cols, std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative dense dimensions");
  if (values_.size() != static_cast<std::size_t>(n_rows * n_cols)) {
    throw std::invalid_argument("dense value count must equal n_rows * n_cols");
  }
}

DenseMatrix DenseMatrix::identity(index_t n) {
  DenseMatrix d(n, n);
  for (index_t i = 0; i < n; ++i) d(i, i) = 1.0;
  return d;
}

// ---------------------------------------------------------------------------
// CsrMatrix

CsrMatrix::CsrMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> row_ptr, std::vector<index_t> col_idx,
                     std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative CSR dimensions");
  if (col_idx_.size() != values_.size()) throw CorruptFormatError("csr: col_idx and values differ in length");
  check_offsets(row_ptr_, static_cast<std::size_t>(n_rows) + 1, col_idx_.size(), "csr row_ptr");
  for (index_t i = 0; i < n_rows_; ++i) {
    for (index_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const index_t j = col_idx_[static_cast<std::size_t>(p)];
      if (j < 0 || j >= n_cols_) throw CorruptFormatError("csr: column index out of range");
      if (p > row_ptr_[i] && col_idx_[static_cast<std::size_t>(p) - 1] >= j) {
        throw CorruptFormatError("csr: column indices not strictly increasing within a row");
      }
      if (values_[static_cast<std::size_t>(p)] == 0.0) throw CorruptFormatError("csr: explicit stored zero");
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(index_t n_rows, index_t n_cols, std::vector<Triplet> entries) {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative CSR dimensions");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw std::invalid_argument("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside " + std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
  }
  // Stable so duplicates are summed in input order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Triplet& x, const Triplet& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });

  std::vector<index_t> row_ptr(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());

  std::size_t i = 0;
  while (i < entries.size()) {
    const index_t r = entries[i].row;
    const index_t c = entries[i].col;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) sum += entries[i].value;
    if (sum != 0.0) {
      col_idx.push_back(c);
      values.push_back(sum);
      ++row_ptr[static_cast<std::size_t>(r) + 1];
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return CsrMatrix(n_rows, n_cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& a) {
  std::vector<index_t> row_ptr{0};
  std::vector<index_t> col_idx;
  std::vector<double> values;
  for (index_t i = 0; i < a.n_rows(); ++i) {
    for (index_t j = 0; j < a.n_cols(); ++j) {
      if (a(i, j) != 0.0) {
        col_idx.push_back(j);
        values.push_back(a(i, j));
      }
    }
    row_ptr.push_back(static_cast<index_t>(col_idx.size()));
  }
  return CsrMatrix(a.n_rows(), a.n_cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(col_idx_.size());
  for (index_t i = 0; i < n_rows_; ++i) {
    for (index_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      out.push_back({i, col_idx_[static_cast<std::size_t>(p)], values_[static_cast<std::size_t>(p)]});
    }
  }
  return out;
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix d(n_rows_, n_cols_);
  for (const auto& t : triplets()) d(t.row, t.col) = t.value;
  return d;
}

// ---------------------------------------------------------------------------
// BcsrMatrix

BcsrMatrix::BcsrMatrix(index_t m, index_t k, index_t b_row, index_t b_col, std::vector<index_t> block_row_ptr,
                       std::vector<index_t> block_col_idx, std::vector<double> blocks, index_t nnz_original)
    : m_(m),
      k_(k),
      b_row_(b_row),
      b_col_(b_col),
      block_row_ptr_(std::move(block_row_ptr)),
      block_col_idx_(std::move(block_col_idx)),
      blocks_(std::move(blocks)),
      nnz_original_(nnz_original) {
  require_block_dims(b_row, b_col);
  if (m < 0 || k < 0) throw std::invalid_argument("negative BCSR dimensions");
  check_offsets(block_row_ptr_, static_cast<std::size_t>(ceil_div(m, b_row)) + 1, block_col_idx_.size(),
                "bcsr block_row_ptr");
  if (blocks_.size() != block_col_idx_.size() * static_cast<std::size_t>(block_size())) {
    throw CorruptFormatError("bcsr: value storage must be nnz_blocks * b_row * b_col");
  }
  const index_t n_block_cols = block_cols();
  index_t counted = 0;
  for (index_t br = 0; br < block_rows(); ++br) {
    for (index_t b = block_row_ptr_[br]; b < block_row_ptr_[br + 1]; ++b) {
      const index_t bc = block_col_idx_[static_cast<std::size_t>(b)];
      if (bc < 0 || bc >= n_block_cols) throw CorruptFormatError("bcsr: block column index out of range");
      if (b > block_row_ptr_[br] && block_col_idx_[static_cast<std::size_t>(b) - 1] >= bc) {
        throw CorruptFormatError("bcsr: block column indices not strictly increasing within a block row");
      }
      const auto vals = block(b);
      const auto nz = std::count_if(vals.begin(), vals.end(), [](double v) { return v != 0.0; });
      if (nz == 0) throw CorruptFormatError("bcsr: stored block without a nonzero");
      // Entries that fall in the padding region must be zero.
      for (index_t r = 0; r < b_row_; ++r) {
        for (index_t c = 0; c < b_col_; ++c) {
          if (vals[static_cast<std::size_t>(r * b_col_ + c)] != 0.0 &&
              (br * b_row_ + r >= m_ || bc * b_col_ + c >= k_)) {
            throw CorruptFormatError("bcsr: nonzero inside block padding");
          }
        }
      }
      counted += nz;
    }
  }
  if (counted != nnz_original_) throw CorruptFormatError("bcsr: nnz_original disagrees with stored nonzeros");
}

BcsrMatrix bcsr_from_csr(const CsrMatrix& a, index_t b_row, index_t b_col) {
  require_block_dims(b_row, b_col);
  const index_t n_block_rows = ceil_div(a.n_rows(), b_row);
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto vals = a.values();

  std::vector<index_t> block_row_ptr{0};
  std::vector<index_t> block_col_idx;
  std::vector<double> blocks;
  block_row_ptr.reserve(static_cast<std::size_t>(n_block_rows) + 1);

  std::vector<index_t> present;
  for (index_t br = 0; br < n_block_rows; ++br) {
    const index_t r0 = br * b_row;
    const index_t r1 = std::min(a.n_rows(), r0 + b_row);
    present.clear();
    for (index_t p = row_ptr[r0]; p < row_ptr[r1]; ++p) present.push_back(col_idx[p] / b_col);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    const auto first = static_cast<index_t>(block_col_idx.size());
    block_col_idx.insert(block_col_idx.end(), present.begin(), present.end());
    blocks.resize(block_col_idx.size() * static_cast<std::size_t>(b_row * b_col), 0.0);
    for (index_t r = r0; r < r1; ++r) {
      for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
        const index_t bc = col_idx[p] / b_col;
        const auto slot = std::lower_bound(present.begin(), present.end(), bc) - present.begin();
        const index_t base = (first + slot) * b_row * b_col;
        blocks[static_cast<std::size_t>(base + (r - r0) * b_col + col_idx[p] % b_col)] = vals[p];
      }
    }
    block_row_ptr.push_back(static_cast<index_t>(block_col_idx.size()));
  }
  return BcsrMatrix(a.n_rows(), a.n_cols(), b_row, b_col, std::move(block_row_ptr), std::move(block_col_idx),
                    std::move(blocks), a.nnz());
}

CsrMatrix bcsr_to_csr(const BcsrMatrix& a) {
  std::vector<index_t> row_ptr{0};
  std::vector<index_t> col_idx;
  std::vector<double> values;
  const auto brp = a.block_row_ptr();
  const auto bci = a.block_col_idx();
  for (index_t i = 0; i < a.m(); ++i) {
    const index_t br = i / a.b_row();
    const index_t r = i % a.b_row();
    for (index_t b = brp[br]; b < brp[br + 1]; ++b) {
      const auto blk = a.block(b);
      for (index_t c = 0; c < a.b_col(); ++c) {
        const index_t j = bci[b] * a.b_col() + c;
        const double v = blk[static_cast<std::size_t>(r * a.b_col() + c)];
        if (j < a.k() && v != 0.0) {
          col_idx.push_back(j);
          values.push_back(v);
        }
      }
    }
    row_ptr.push_back(static_cast<index_t>(col_idx.size()));
  }
  return CsrMatrix(a.m(), a.k(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

double fill_ratio(const BcsrMatrix& a) {
  if (a.nnz_blocks() == 0) throw UndefinedMetricError("fill ratio undefined: no stored blocks");
  return static_cast<double>(a.nnz_original()) / static_cast<double>(a.nnz_blocks() * a.block_size());
}

// ---------------------------------------------------------------------------
// WcsrMatrix

WcsrMatrix::WcsrMatrix(index_t m, index_t k, index_t b_row, index_t b_col, std::vector<index_t> window_row_ptr,
                       std::vector<index_t> window_col_idx, std::vector<double> values, index_t nnz_original)
    : m_(m),
      k_(k),
      b_row_(b_row),
      b_col_(b_col),
      window_row_ptr_(std::move(window_row_ptr)),
      window_col_idx_(std::move(window_col_idx)),
      values_(std::move(values)),
      nnz_original_(nnz_original) {
  require_block_dims(b_row, b_col);
  if (m < 0 || k < 0) throw std::invalid_argument("negative WCSR dimensions");
  check_offsets(window_row_ptr_, static_cast<std::size_t>(ceil_div(m, b_row)) + 1, window_col_idx_.size(),
                "wcsr window_row_ptr");
  if (values_.size() != window_col_idx_.size() * static_cast<std::size_t>(b_row_)) {
    throw CorruptFormatError("wcsr: value storage must be b_row * padded_nnz_cols");
  }
  index_t counted = 0;
  for (index_t w = 0; w < windows(); ++w) {
    if (window_cols(w) % b_col_ != 0) throw CorruptFormatError("wcsr: window column count not a multiple of b_col");
    bool in_padding = false;
    index_t prev = -1;
    for (index_t p = window_begin(w); p < window_begin(w + 1); ++p) {
      const index_t j = window_col_idx_[static_cast<std::size_t>(p)];
      const auto vec = column_vector(p);
      if (j == kSentinel) {
        in_padding = true;
        if (std::any_of(vec.begin(), vec.end(), [](double v) { return v != 0.0; })) {
          throw CorruptFormatError("wcsr: nonzero value in a sentinel column");
        }
        continue;
      }
      if (in_padding) throw CorruptFormatError("wcsr: sentinel columns must form a suffix of the window");
      if (j < 0 || j >= k_) throw CorruptFormatError("wcsr: window_col_idx out of range");
      if (j <= prev) throw CorruptFormatError("wcsr: window columns not strictly increasing");
      prev = j;
      for (index_t r = 0; r < b_row_; ++r) {
        if (vec[static_cast<std::size_t>(r)] == 0.0) continue;
        if (w * b_row_ + r >= m_) throw CorruptFormatError("wcsr: nonzero inside window row padding");
        ++counted;
      }
    }
  }
  if (counted != nnz_original_) throw CorruptFormatError("wcsr: nnz_original disagrees with stored nonzeros");
}

WcsrMatrix wcsr_from_csr(const CsrMatrix& a, index_t b_row, index_t b_col) {
  require_block_dims(b_row, b_col);
  const index_t n_windows = ceil_div(a.n_rows(), b_row);
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto vals = a.values();

  std::vector<index_t> window_row_ptr{0};
  std::vector<index_t> window_col_idx;
  std::vector<double> values;
  window_row_ptr.reserve(static_cast<std::size_t>(n_windows) + 1);

  std::vector<index_t> cols;
  for (index_t w = 0; w < n_windows; ++w) {
    const index_t r0 = w * b_row;
    const index_t r1 = std::min(a.n_rows(), r0 + b_row);
    cols.assign(col_idx.begin() + row_ptr[r0], col_idx.begin() + row_ptr[r1]);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    const auto n_real = static_cast<index_t>(cols.size());
    const index_t n_padded = ceil_div(n_real, b_col) * b_col;
    const auto base = static_cast<index_t>(window_col_idx.size());
    window_col_idx.insert(window_col_idx.end(), cols.begin(), cols.end());
    window_col_idx.resize(static_cast<std::size_t>(base + n_padded), WcsrMatrix::kSentinel);
    values.resize(static_cast<std::size_t>((base + n_padded) * b_row), 0.0);

    for (index_t r = r0; r < r1; ++r) {
      for (index_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
        const auto slot = std::lower_bound(cols.begin(), cols.end(), col_idx[p]) - cols.begin();
        values[static_cast<std::size_t>((base + slot) * b_row + (r - r0))] = vals[p];
      }
    }
    window_row_ptr.push_back(static_cast<index_t>(window_col_idx.size()));
  }
  return WcsrMatrix(a.n_rows(), a.n_cols(), b_row, b_col, std::move(window_row_ptr), std::move(window_col_idx),
                    std::move(values), a.nnz());
}

CsrMatrix wcsr_to_csr(const WcsrMatrix& a) {
  std::vector<index_t> row_ptr{0};
  std::vector<index_t> col_idx;
  std::vector<double> values;
  const auto wci = a.window_col_idx();
  for (index_t i = 0; i < a.m(); ++i) {
    const index_t w = i / a.b_row();
    const index_t r = i % a.b_row();
    for (index_t p = a.window_begin(w); p < a.window_begin(w + 1); ++p) {
      if (wci[p] == WcsrMatrix::kSentinel) continue;
      const double v = a.column_vector(p)[static_cast<std::size_t>(r)];
      if (v != 0.0) {
        col_idx.push_back(wci[p]);
        values.push_back(v);
      }
    }
    row_ptr.push_back(static_cast<index_t>(col_idx.size()));
  }
  return CsrMatrix(a.m(), a.k(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

double wcsr_padding_ratio(const WcsrMatrix& a) {
  if (a.padded_nnz_cols() == 0) throw UndefinedMetricError("padding ratio undefined: no packed columns");
  const auto wci = a.window_col_idx();
  const auto sentinels = std::count(wci.begin(), wci.end(), WcsrMatrix::kSentinel);
  return static_cast<double>(sentinels) / static_cast<double>(a.padded_nnz_cols());
}

std::vector<index_t> window_column_counts(const WcsrMatrix& a) {
  std::vector<index_t> counts(static_cast<std::size_t>(a.windows()));
  for (index_t w = 0; w < a.windows(); ++w) counts[static_cast<std::size_t>(w)] = a.window_cols(w);
  return counts;
}

// ---------------------------------------------------------------------------
// Permutation

Permutation::Permutation(std::vector<index_t> new_of_old) : order_(std::move(new_of_old)) {
  std::vector<bool> seen(order_.size(), false);
  for (const index_t v : order_) {
    if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("permutation is not a bijection of [0, n)");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(index_t n) {
  std::vector<index_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), index_t{0});
  return Permutation(std::move(order));
}

Permutation Permutation::from_sequence(std::span<const index_t> sequence) {
  std::vector<index_t> order(sequence.size(), -1);
  for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
    const index_t old = sequence[pos];
    if (old < 0 || old >= static_cast<index_t>(sequence.size()) || order[static_cast<std::size_t>(old)] != -1) {
      throw std::invalid_argument("visit sequence is not a bijection of [0, n)");
    }
    order[static_cast<std::size_t>(old)] = static_cast<index_t>(pos);
  }
  return Permutation(std::move(order));
}

Permutation Permutation::inverse() const {
  std::vector<index_t> inv(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) inv[static_cast<std::size_t>(order_[i])] = static_cast<index_t>(i);
  return Permutation(std::move(inv));
}

CsrMatrix apply_permutation(const CsrMatrix& a, const Permutation& p, PermuteAxes axes) {
  const bool rows = axes != PermuteAxes::cols;
  const bool cols = axes != PermuteAxes::rows;
  if (rows && p.size() != a.n_rows()) throw std::invalid_argument("row permutation length mismatch");
  if (cols && p.size() != a.n_cols()) throw std::invalid_argument("column permutation length mismatch");
  auto entries = a.triplets();
  for (auto& t : entries) {
    if (rows) t.row = p(t.row);
    if (cols) t.col = p(t.col);
  }
  return CsrMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(entries));
}

index_t bandwidth(const CsrMatrix& a) {
  if (a.n_rows() != a.n_cols()) throw std::invalid_argument("bandwidth requires a square matrix");
  index_t bw = 0;
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  for (index_t i = 0; i < a.n_rows(); ++i) {
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) bw = std::max(bw, std::abs(i - col_idx[p]));
  }
  return bw;
}

}  // namespace sparselab
