#include <algorithm>

#include <omp.h>

#include "spmm_kernels.hpp"

namespace sparselab::detail {

template <typename T>
void csr_spmm_omp(const CsrMatrix& a, const Panel<T>& b, Panel<T>& c) {
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto vals = a.values();
  const index_t n = b.n_cols;
  const index_t rows = a.n_rows();
#pragma omp parallel for schedule(dynamic, 16)
  for (index_t i = 0; i < rows; ++i) {
    T* out = c.row(i);
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const T av = static_cast<T>(vals[p]);
      const T* brow = b.row(col_idx[p]);
      for (index_t j = 0; j < n; ++j) out[j] += av * brow[j];
    }
  }
}

// Output tiles are disjoint, so no synchronization is needed.
template <typename T>
void bcsr_spmm_omp(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, Panel<T>& c) {
  const index_t m_tiles = grid.m_tiles;
  const index_t n_tiles = grid.n_tiles;
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (index_t nt = 0; nt < n_tiles; ++nt) {
    for (index_t mt = 0; mt < m_tiles; ++mt) bcsr_tile(a, b, grid, mt, nt, c);
  }
}

// Tasks of the same window race on the same output rows; partial sums are
// privatized per task and merged with atomic adds.
template <typename T>
void wcsr_spmm_omp(const WcsrMatrix& a, const Panel<T>& b, std::span<const TaskDescriptor> tasks, Panel<T>& c) {
  const index_t n = b.n_cols;
  const auto n_tasks = static_cast<index_t>(tasks.size());
  bool corrupt = false;
#pragma omp parallel
  {
    std::vector<T> partial(static_cast<std::size_t>(a.b_row() * n));
#pragma omp for schedule(dynamic)
    for (index_t t = 0; t < n_tasks; ++t) {
      const auto& task = tasks[static_cast<std::size_t>(t)];
      std::fill(partial.begin(), partial.end(), T{0});
      try {
        wcsr_task(a, b, task, partial);
      } catch (const CorruptFormatError&) {
#pragma omp atomic write
        corrupt = true;
        continue;
      }
      const index_t i0 = task.window_id * a.b_row();
      const index_t rows = std::min(a.b_row(), a.m() - i0);
      for (index_t r = 0; r < rows; ++r) {
        T* out = c.row(i0 + r);
        const T* src = partial.data() + r * n;
        for (index_t j = 0; j < n; ++j) {
#pragma omp atomic update
          out[j] += src[j];
        }
      }
    }
  }
  if (corrupt) throw CorruptFormatError("wcsr: window_col_idx outside B's rows");
}

template void csr_spmm_omp<double>(const CsrMatrix&, const Panel<double>&, Panel<double>&);
template void csr_spmm_omp<float>(const CsrMatrix&, const Panel<float>&, Panel<float>&);
template void bcsr_spmm_omp<double>(const BcsrMatrix&, const Panel<double>&, const TileGrid&, Panel<double>&);
template void bcsr_spmm_omp<float>(const BcsrMatrix&, const Panel<float>&, const TileGrid&, Panel<float>&);
template void wcsr_spmm_omp<double>(const WcsrMatrix&, const Panel<double>&, std::span<const TaskDescriptor>,
                                    Panel<double>&);
template void wcsr_spmm_omp<float>(const WcsrMatrix&, const Panel<float>&, std::span<const TaskDescriptor>,
                                   Panel<float>&);

}  // namespace sparselab::detail
