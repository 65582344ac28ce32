#pragma once

// Reference SpMM executors (C = A x B) for CSR, BCSR and WCSR operands.
//
// Every executor has a serial reference path and an OpenMP path selected by
// `Exec`. Serial and parallel BCSR/CSR are bit-identical (each output element
// is owned by one thread and accumulated in the same order). Parallel WCSR
// merges per-task partial sums with atomic adds, so it agrees with the serial
// path only up to floating-point reassociation.
//
// B is row-major. On the GPU, B is column-major for coalesced TMA tiles; that
// is a layout concern and does not change the arithmetic modelled here.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sparselab/formats.hpp"

namespace sparselab {

enum class Exec { serial, parallel };

/// f64 is the default; f32 rounds A and B to float and accumulates in float.
enum class Precision { f64, f32 };

/// Grid of (block-row, BN-wide column slice) output tiles.
struct TileGrid {
  index_t m_tiles = 0;
  index_t n_tiles = 0;
  index_t bn = 0;

  static TileGrid make(index_t m, index_t n, index_t b_row, index_t bn);
  bool operator==(const TileGrid&) const = default;
};

/// A contiguous run of packed columns inside one WCSR window.
struct TaskDescriptor {
  index_t window_id = 0;
  index_t col_offset = 0;
  index_t col_count = 0;
  bool operator==(const TaskDescriptor&) const = default;
};

/// task_size value meaning "never split a window".
inline constexpr index_t kWholeWindow = std::numeric_limits<index_t>::max();
inline constexpr index_t kDefaultTaskSize = 64;

/// Triple loop in i-k-j order. Throws std::invalid_argument on shape mismatch.
DenseMatrix dense_oracle_spmm(const DenseMatrix& a, const DenseMatrix& b, Precision precision = Precision::f64);

DenseMatrix csr_spmm(const CsrMatrix& a, const DenseMatrix& b, Exec exec = Exec::serial,
                     Precision precision = Precision::f64);

/// One output tile per (block row, BN-wide slice of B); nonzero blocks are
/// reduced in block_col_idx order, zeros inside stored blocks included.
DenseMatrix bcsr_spmm(const BcsrMatrix& a, const DenseMatrix& b, index_t bn, Exec exec = Exec::serial,
                      Precision precision = Precision::f64);

/// Splits every window into runs of at most task_size packed columns.
/// task_size must be kWholeWindow or a positive multiple of b_col.
std::vector<TaskDescriptor> make_tasks(const WcsrMatrix& a, index_t task_size = kDefaultTaskSize);

DenseMatrix wcsr_spmm(const WcsrMatrix& a, const DenseMatrix& b, index_t task_size = kDefaultTaskSize,
                      Exec exec = Exec::serial, Precision precision = Precision::f64);

/// Runs an explicit task list serially in the given order. Used to check that
/// the result does not depend on which task finishes first.
DenseMatrix wcsr_spmm_tasks(const WcsrMatrix& a, const DenseMatrix& b, std::span<const TaskDescriptor> tasks,
                            Precision precision = Precision::f64);

/// Uniform [-1, 1] matrix from a seeded 64-bit Mersenne Twister.
DenseMatrix random_dense(index_t n_rows, index_t n_cols, std::uint64_t seed);

/// ||got - want||_F / ||want||_F, or ||got||_F when want is zero.
double relative_frobenius_error(const DenseMatrix& got, const DenseMatrix& want);

/// max_ij |got - want|.
double max_abs_error(const DenseMatrix& got, const DenseMatrix& want);

/// Row i of the input becomes row p(i) of the output.
DenseMatrix permute_rows(const DenseMatrix& a, const Permutation& p);

}  // namespace sparselab
