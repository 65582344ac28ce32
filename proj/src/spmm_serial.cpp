#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spmm_kernels.hpp"

namespace sparselab {

namespace detail {

template <typename T>
void csr_spmm_serial(const CsrMatrix& a, const Panel<T>& b, Panel<T>& c) {
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto vals = a.values();
  const index_t n = b.n_cols;
  for (index_t i = 0; i < a.n_rows(); ++i) {
    T* out = c.row(i);
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const T av = static_cast<T>(vals[p]);
      const T* brow = b.row(col_idx[p]);
      for (index_t j = 0; j < n; ++j) out[j] += av * brow[j];
    }
  }
}

template <typename T>
void bcsr_tile(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, index_t m_tile, index_t n_tile,
               Panel<T>& c) {
  const index_t b_row = a.b_row();
  const index_t b_col = a.b_col();
  const index_t j0 = n_tile * grid.bn;
  const index_t j1 = std::min(b.n_cols, j0 + grid.bn);
  const index_t r1 = std::min(a.m(), (m_tile + 1) * b_row);
  const auto brp = a.block_row_ptr();
  const auto bci = a.block_col_idx();

  for (index_t i = m_tile * b_row; i < r1; ++i) {
    const index_t r = i - m_tile * b_row;
    T* out = c.row(i);
    // K-reduction over the block row's stored blocks, one WGMMA step each.
    for (index_t blk = brp[m_tile]; blk < brp[m_tile + 1]; ++blk) {
      const auto vals = a.block(blk);
      const index_t k0 = bci[blk] * b_col;
      const index_t kn = std::min(b_col, a.k() - k0);
      for (index_t cc = 0; cc < kn; ++cc) {
        const T av = static_cast<T>(vals[static_cast<std::size_t>(r * b_col + cc)]);
        const T* brow = b.row(k0 + cc);
        for (index_t j = j0; j < j1; ++j) out[j] += av * brow[j];
      }
    }
  }
}

template <typename T>
void bcsr_spmm_serial(const BcsrMatrix& a, const Panel<T>& b, const TileGrid& grid, Panel<T>& c) {
  for (index_t mt = 0; mt < grid.m_tiles; ++mt) {
    for (index_t nt = 0; nt < grid.n_tiles; ++nt) bcsr_tile(a, b, grid, mt, nt, c);
  }
}

template <typename T>
void wcsr_task(const WcsrMatrix& a, const Panel<T>& b, const TaskDescriptor& task, std::vector<T>& partial) {
  const index_t b_row = a.b_row();
  const index_t n = b.n_cols;
  const index_t rows = std::min(b_row, a.m() - task.window_id * b_row);
  const auto wci = a.window_col_idx();
  const index_t p0 = a.window_begin(task.window_id) + task.col_offset;
  for (index_t p = p0; p < p0 + task.col_count; ++p) {
    const index_t col = wci[p];
    if (col == WcsrMatrix::kSentinel) continue;
    if (col < 0 || col >= b.n_rows) {
      throw CorruptFormatError("wcsr: window_col_idx " + std::to_string(col) + " outside B's " +
                               std::to_string(b.n_rows) + " rows");
    }
    const auto vec = a.column_vector(p);
    const T* brow = b.row(col);
    for (index_t r = 0; r < rows; ++r) {
      const T av = static_cast<T>(vec[static_cast<std::size_t>(r)]);
      T* out = partial.data() + r * n;
      for (index_t j = 0; j < n; ++j) out[j] += av * brow[j];
    }
  }
}

template <typename T>
void wcsr_spmm_serial(const WcsrMatrix& a, const Panel<T>& b, std::span<const TaskDescriptor> tasks, Panel<T>& c) {
  const index_t n = b.n_cols;
  std::vector<T> partial(static_cast<std::size_t>(a.b_row() * n));
  for (const auto& task : tasks) {
    std::fill(partial.begin(), partial.end(), T{0});
    wcsr_task(a, b, task, partial);
    const index_t i0 = task.window_id * a.b_row();
    const index_t rows = std::min(a.b_row(), a.m() - i0);
    for (index_t r = 0; r < rows; ++r) {
      T* out = c.row(i0 + r);
      const T* src = partial.data() + r * n;
      for (index_t j = 0; j < n; ++j) out[j] += src[j];
    }
  }
}

template void csr_spmm_serial<double>(const CsrMatrix&, const Panel<double>&, Panel<double>&);
template void csr_spmm_serial<float>(const CsrMatrix&, const Panel<float>&, Panel<float>&);
template void bcsr_tile<double>(const BcsrMatrix&, const Panel<double>&, const TileGrid&, index_t, index_t,
                                Panel<double>&);
template void bcsr_tile<float>(const BcsrMatrix&, const Panel<float>&, const TileGrid&, index_t, index_t,
                               Panel<float>&);
template void bcsr_spmm_serial<double>(const BcsrMatrix&, const Panel<double>&, const TileGrid&, Panel<double>&);
template void bcsr_spmm_serial<float>(const BcsrMatrix&, const Panel<float>&, const TileGrid&, Panel<float>&);
template void wcsr_task<double>(const WcsrMatrix&, const Panel<double>&, const TaskDescriptor&, std::vector<double>&);
template void wcsr_task<float>(const WcsrMatrix&, const Panel<float>&, const TaskDescriptor&, std::vector<float>&);
template void wcsr_spmm_serial<double>(const WcsrMatrix&, const Panel<double>&, std::span<const TaskDescriptor>,
                                       Panel<double>&);
template void wcsr_spmm_serial<float>(const WcsrMatrix&, const Panel<float>&, std::span<const TaskDescriptor>,
                                      Panel<float>&);

}  // namespace detail

namespace {

template <typename T>
DenseMatrix oracle(const DenseMatrix& a, const DenseMatrix& b) {
  const auto ap = detail::to_panel<T>(a);
  const auto bp = detail::to_panel<T>(b);
  detail::Panel<T> c{a.n_rows(), b.n_cols(), std::vector<T>(static_cast<std::size_t>(a.n_rows() * b.n_cols()))};
  for (index_t i = 0; i < a.n_rows(); ++i) {
    for (index_t k = 0; k < a.n_cols(); ++k) {
      const T av = ap.row(i)[k];
      for (index_t j = 0; j < b.n_cols(); ++j) c.row(i)[j] += av * bp.row(k)[j];
    }
  }
  return detail::from_panel(c);
}

template <typename T>
detail::Panel<T> zero_panel(index_t rows, index_t cols) {
  return {rows, cols, std::vector<T>(static_cast<std::size_t>(rows * cols), T{0})};
}

void require_inner(index_t a_cols, index_t b_rows) {
  if (a_cols != b_rows) {
    throw std::invalid_argument("inner dimensions differ: A has " + std::to_string(a_cols) + " columns, B has " +
                                std::to_string(b_rows) + " rows");
  }
}

template <typename T>
DenseMatrix run_csr(const CsrMatrix& a, const DenseMatrix& b, Exec exec) {
  const auto bp = detail::to_panel<T>(b);
  auto c = zero_panel<T>(a.n_rows(), b.n_cols());
  if (exec == Exec::parallel) {
    detail::csr_spmm_omp(a, bp, c);
  } else {
    detail::csr_spmm_serial(a, bp, c);
  }
  return detail::from_panel(c);
}

template <typename T>
DenseMatrix run_bcsr(const BcsrMatrix& a, const DenseMatrix& b, index_t bn, Exec exec) {
  const auto grid = TileGrid::make(a.m(), b.n_cols(), a.b_row(), bn);
  const auto bp = detail::to_panel<T>(b);
  auto c = zero_panel<T>(a.m(), b.n_cols());
  if (exec == Exec::parallel) {
    detail::bcsr_spmm_omp(a, bp, grid, c);
  } else {
    detail::bcsr_spmm_serial(a, bp, grid, c);
  }
  return detail::from_panel(c);
}

template <typename T>
DenseMatrix run_wcsr(const WcsrMatrix& a, const DenseMatrix& b, std::span<const TaskDescriptor> tasks, Exec exec) {
  const auto bp = detail::to_panel<T>(b);
  auto c = zero_panel<T>(a.m(), b.n_cols());
  if (exec == Exec::parallel) {
    detail::wcsr_spmm_omp(a, bp, tasks, c);
  } else {
    detail::wcsr_spmm_serial(a, bp, tasks, c);
  }
  return detail::from_panel(c);
}

}  // namespace

TileGrid TileGrid::make(index_t m, index_t n, index_t b_row, index_t bn) {
  if (b_row < 1 || bn < 1) throw std::invalid_argument("tile dimensions must be >= 1");
  return {ceil_div(m, b_row), ceil_div(n, bn), bn};
}

DenseMatrix dense_oracle_spmm(const DenseMatrix& a, const DenseMatrix& b, Precision precision) {
  require_inner(a.n_cols(), b.n_rows());
  return precision == Precision::f32 ? oracle<float>(a, b) : oracle<double>(a, b);
}

DenseMatrix csr_spmm(const CsrMatrix& a, const DenseMatrix& b, Exec exec, Precision precision) {
  require_inner(a.n_cols(), b.n_rows());
  return precision == Precision::f32 ? run_csr<float>(a, b, exec) : run_csr<double>(a, b, exec);
}

DenseMatrix bcsr_spmm(const BcsrMatrix& a, const DenseMatrix& b, index_t bn, Exec exec, Precision precision) {
  require_inner(a.k(), b.n_rows());
  if (bn < 1) throw std::invalid_argument("BN must be >= 1");
  return precision == Precision::f32 ? run_bcsr<float>(a, b, bn, exec) : run_bcsr<double>(a, b, bn, exec);
}

std::vector<TaskDescriptor> make_tasks(const WcsrMatrix& a, index_t task_size) {
  if (task_size != kWholeWindow && (task_size < a.b_col() || task_size % a.b_col() != 0)) {
    throw std::invalid_argument("task_size " + std::to_string(task_size) + " must be a positive multiple of b_col " +
                                std::to_string(a.b_col()));
  }
  std::vector<TaskDescriptor> tasks;
  for (index_t w = 0; w < a.windows(); ++w) {
    const index_t cols = a.window_cols(w);
    for (index_t off = 0; off < cols; off += std::min(task_size, cols - off)) {
      tasks.push_back({w, off, std::min(task_size, cols - off)});
    }
  }
  return tasks;
}

DenseMatrix wcsr_spmm(const WcsrMatrix& a, const DenseMatrix& b, index_t task_size, Exec exec, Precision precision) {
  require_inner(a.k(), b.n_rows());
  const auto tasks = make_tasks(a, task_size);
  return precision == Precision::f32 ? run_wcsr<float>(a, b, tasks, exec) : run_wcsr<double>(a, b, tasks, exec);
}

DenseMatrix wcsr_spmm_tasks(const WcsrMatrix& a, const DenseMatrix& b, std::span<const TaskDescriptor> tasks,
                            Precision precision) {
  require_inner(a.k(), b.n_rows());
  for (const auto& t : tasks) {
    if (t.window_id < 0 || t.window_id >= a.windows() || t.col_offset < 0 || t.col_count < 0 ||
        t.col_offset + t.col_count > a.window_cols(t.window_id)) {
      throw std::invalid_argument("task descriptor outside its window");
    }
  }
  return precision == Precision::f32 ? run_wcsr<float>(a, b, tasks, Exec::serial)
                                     : run_wcsr<double>(a, b, tasks, Exec::serial);
}

DenseMatrix random_dense(index_t n_rows, index_t n_cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix d(n_rows, n_cols);
  for (auto& v : d.values()) v = dist(rng);
  return d;
}

double relative_frobenius_error(const DenseMatrix& got, const DenseMatrix& want) {
  if (got.n_rows() != want.n_rows() || got.n_cols() != want.n_cols()) {
    throw std::invalid_argument("error metric needs equal shapes");
  }
  double diff = 0.0;
  double ref = 0.0;
  const auto g = got.values();
  const auto w = want.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    diff += (g[i] - w[i]) * (g[i] - w[i]);
    ref += w[i] * w[i];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

double max_abs_error(const DenseMatrix& got, const DenseMatrix& want) {
  if (got.n_rows() != want.n_rows() || got.n_cols() != want.n_cols()) {
    throw std::invalid_argument("error metric needs equal shapes");
  }
  double m = 0.0;
  const auto g = got.values();
  const auto w = want.values();
  for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i] - w[i]));
  return m;
}

DenseMatrix permute_rows(const DenseMatrix& a, const Permutation& p) {
  if (p.size() != a.n_rows()) throw std::invalid_argument("row permutation length mismatch");
  DenseMatrix out(a.n_rows(), a.n_cols());
  for (index_t i = 0; i < a.n_rows(); ++i) {
    const auto src = a.row(i);
    std::copy(src.begin(), src.end(), out.row(p(i)).begin());
  }
  return out;
}

}  // namespace sparselab
