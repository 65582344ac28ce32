#pragma once

// Internal kernel entry points shared by the serial reference (spmm_serial.cpp)
// and the OpenMP kernels (spmm_omp.cpp).

#include <vector>

#include "sparselab/spmm.hpp"

namespace sparselab::detail {

/// Row-major working copy of a dense operand in the accumulation type.
template <typename T>
struct Panel {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<T> data;

  const T* row(index_t i) const { return data.data() + i * n_cols; }
  T* row(index_t i) { return data.data() + i * n_cols; }
};

template <typename T>
Panel<T> to_panel(const DenseMatrix& d) {
  Panel<T> p{d.n_rows(), d.n_cols(), std::vector<T>(d.values().size())};
  const auto v = d.values();
  for (std::size_t i = 0; i < v.size(); ++i) p.data[i] = static_cast<T>(v[i]);
  return p;
}

template <typename T>
DenseMatrix from_panel(const Panel<T>& p) {
  std::vector<double> v(p.data.begin(), p.data.end());
  return DenseMatrix(p.n_rows, p.n_cols, std::move(v));
}

template <typename T>
void csr_spmm_serial(const CsrMatrix& a, const Panel<T>& b, Panel<T>& c);
template <typename T>
void csr_spmm_omp(const CsrMatrix& a, const Panel<T>& b, Panel<T>& c);

template <typename T>
void bcsr_tile(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, index_t m_tile, index_t n_tile,
               Panel<T>& c);
template <typename T>
void bcsr_spmm_serial(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, Panel<T>& c);
template <typename T>
void bcsr_spmm_omp(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, Panel<T>& c);

/// Computes one task's contribution into `partial` (b_row x N, zeroed by the
/// caller). Throws CorruptFormatError on an out-of-range column index.
template <typename T>
void wcsr_task(const WcsrMatrix& a, const Panel<T>& b, const TaskDescriptor& task, std::vector<T>& partial);
template <typename T>
void wcsr_spmm_serial(const WcsrMatrix& a, const Panel<T>& b, std::span<const TaskDescriptor> tasks, Panel<T>& c);
template <typename T>
void wcsr_spmm_omp(const WcsrMatrix& a, const Panel<T>& b, std::span<const TaskDescriptor> tasks, Panel<T>& c);

}  // namespace sparselab::detail
