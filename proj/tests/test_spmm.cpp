#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "sparselab/spmm.hpp"
#include "support/generators.hpp"

using namespace sparselab;

namespace {

DenseMatrix ones(index_t r, index_t c) { return DenseMatrix(r, c, 1.0); }

DenseMatrix oracle(const CsrMatrix& a, const DenseMatrix& b) { return dense_oracle_spmm(a.to_dense(), b); }

}  // namespace

TEST(Oracle, IdentityAndZero) {
  const auto b = random_dense(5, 3, 1);
  EXPECT_EQ(dense_oracle_spmm(DenseMatrix::identity(5), b), b);
  EXPECT_EQ(dense_oracle_spmm(DenseMatrix(4, 5), b), DenseMatrix(4, 3));
}

TEST(Oracle, SmallExampleTimesOnes) {
  const auto c = dense_oracle_spmm(gen::small_example().to_dense(), ones(4, 2));
  EXPECT_EQ(c, DenseMatrix(4, 2, {3, 3, 7, 7, 5, 5, 6, 6}));
}

TEST(Oracle, ShapeMismatch) {
  EXPECT_THROW(dense_oracle_spmm(DenseMatrix(2, 3), DenseMatrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(csr_spmm(gen::small_example(), DenseMatrix(3, 2)), std::invalid_argument);
  EXPECT_THROW(bcsr_spmm(bcsr_from_csr(gen::small_example(), 2, 2), DenseMatrix(3, 2), 2), std::invalid_argument);
  EXPECT_THROW(wcsr_spmm(wcsr_from_csr(gen::small_example(), 2, 2), DenseMatrix(3, 2)), std::invalid_argument);
  EXPECT_THROW(bcsr_spmm(bcsr_from_csr(gen::small_example(), 2, 2), ones(4, 2), 0), std::invalid_argument);
}

TEST(Csr, SmallExampleAllPaths) {
  const auto a = gen::small_example();
  const auto want = DenseMatrix(4, 2, {3, 3, 7, 7, 5, 5, 6, 6});
  EXPECT_EQ(csr_spmm(a, ones(4, 2)), want);
  EXPECT_EQ(csr_spmm(a, ones(4, 2), Exec::parallel), want);
  EXPECT_EQ(csr_spmm(CsrMatrix::from_triplets(3, 3, {}), ones(3, 2)), DenseMatrix(3, 2));
}

TEST(Bcsr, SmallExampleAndTileWidths) {
  const auto a = gen::small_example();
  const auto b = bcsr_from_csr(a, 2, 2);
  const auto want = DenseMatrix(4, 2, {3, 3, 7, 7, 5, 5, 6, 6});
  EXPECT_EQ(bcsr_spmm(b, ones(4, 2), 2), want);
  const auto rb = random_dense(4, 4, 3);
  EXPECT_EQ(bcsr_spmm(b, rb, 7), oracle(a, rb));  // BN > N: one n tile
}

TEST(Bcsr, EmptyBlockRowGivesZeroRows) {
  const auto a = CsrMatrix::from_triplets(6, 4, {{0, 0, 1.0}, {5, 3, 2.0}});
  const auto c = bcsr_spmm(bcsr_from_csr(a, 2, 2), ones(4, 3), 2);
  for (index_t i = 1; i < 5; ++i) {
    for (index_t j = 0; j < 3; ++j) EXPECT_EQ(c(i, j), 0.0);
  }
}

TEST(TileGridTest, Shape) {
  EXPECT_EQ(TileGrid::make(130, 100, 64, 32), (TileGrid{3, 4, 32}));
  EXPECT_EQ(TileGrid::make(64, 4, 64, 7), (TileGrid{1, 1, 7}));
}

TEST(Tasks, Partition) {
  // One window of 16 packed columns.
  std::vector<Triplet> t;
  for (index_t j = 0; j < 16; ++j) t.push_back({0, j, 1.0});
  const auto w = wcsr_from_csr(CsrMatrix::from_triplets(2, 16, t), 2, 8);
  EXPECT_EQ(make_tasks(w, 8), (std::vector<TaskDescriptor>{{0, 0, 8}, {0, 8, 8}}));
  EXPECT_EQ(make_tasks(w, 16), (std::vector<TaskDescriptor>{{0, 0, 16}}));
  EXPECT_EQ(make_tasks(w, kWholeWindow), (std::vector<TaskDescriptor>{{0, 0, 16}}));
  EXPECT_TRUE(make_tasks(wcsr_from_csr(CsrMatrix::from_triplets(4, 4, {}), 2, 2)).empty());
}

TEST(Tasks, OnePerNonEmptyWindow) {
  const auto a = CsrMatrix::from_triplets(6, 6, {{0, 1, 1}, {4, 2, 1}, {5, 5, 1}});
  const auto w = wcsr_from_csr(a, 2, 2);
  EXPECT_EQ(make_tasks(w, 8), (std::vector<TaskDescriptor>{{0, 0, 2}, {2, 0, 2}}));
}

TEST(Tasks, InvalidSize) {
  const auto w = wcsr_from_csr(gen::small_example(), 2, 2);
  EXPECT_THROW(make_tasks(w, 0), std::invalid_argument);
  EXPECT_THROW(make_tasks(w, 3), std::invalid_argument);
  EXPECT_THROW(make_tasks(w, -2), std::invalid_argument);
}

TEST(Tasks, CoverEveryPackedColumnOnce) {
  for (const auto& [name, a] : gen::random_corpus(30, 21, 200)) {
    for (const index_t bc : {1, 2, 8}) {
      const auto w = wcsr_from_csr(a, 8, bc);
      for (const index_t ts : {bc, 4 * bc, 64 * bc, kWholeWindow}) {
        std::vector<int> hits(static_cast<std::size_t>(w.padded_nnz_cols()), 0);
        index_t prev_w = -1, prev_off = -1;
        for (const auto& t : make_tasks(w, ts)) {
          EXPECT_TRUE(t.window_id > prev_w || (t.window_id == prev_w && t.col_offset > prev_off));
          prev_w = t.window_id;
          prev_off = t.col_offset;
          EXPECT_EQ(t.col_offset % bc, 0);
          EXPECT_LE(t.col_count, ts);
          EXPECT_LE(t.col_offset + t.col_count, w.window_cols(t.window_id));
          for (index_t p = 0; p < t.col_count; ++p) ++hits[static_cast<std::size_t>(w.window_begin(t.window_id) + t.col_offset + p)];
        }
        EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; })) << name;
      }
    }
  }
}

TEST(Wcsr, SmallExampleAndSentinels) {
  const auto a = CsrMatrix::from_triplets(2, 6, {{0, 1, 1.0}, {1, 3, 2.0}, {0, 5, 3.0}});
  const auto w = wcsr_from_csr(a, 2, 2);  // last packed column is a sentinel
  const auto b = random_dense(6, 3, 4);
  EXPECT_LE(relative_frobenius_error(wcsr_spmm(w, b, 2), oracle(a, b)), 1e-12);
  EXPECT_EQ(wcsr_spmm(wcsr_from_csr(gen::small_example(), 2, 2), ones(4, 2)),
            DenseMatrix(4, 2, {3, 3, 7, 7, 5, 5, 6, 6}));
}

TEST(Wcsr, ParallelMatchesSerial) {
  for (const auto& [name, a] : gen::random_corpus(10, 22, 300)) {
    const auto w = wcsr_from_csr(a, 16, 8);
    const auto b = random_dense(a.n_cols(), 17, 5);
    const auto s = wcsr_spmm(w, b, 8, Exec::serial);
    EXPECT_LE(relative_frobenius_error(wcsr_spmm(w, b, 8, Exec::parallel), s), 1e-12) << name;
  }
}

TEST(SpmmProperties, OracleEquivalence) {
  std::size_t i = 0;
  for (const auto& [name, a] : gen::random_corpus(40, 23, 256)) {
    const index_t n = std::array<index_t, 4>{1, 7, 33, 64}[i++ % 4];
    const auto b = random_dense(a.n_cols(), n, 100 + i);
    const auto want = oracle(a, b);
    SCOPED_TRACE(name);
    for (const Exec e : {Exec::serial, Exec::parallel}) {
      EXPECT_EQ(csr_spmm(a, b, e), want);
      EXPECT_EQ(bcsr_spmm(bcsr_from_csr(a, 8, 8), b, 5, e), want);
      EXPECT_EQ(bcsr_spmm(bcsr_from_csr(a, 64, 64), b, 64, e), want);
      for (const index_t ts : {index_t{8}, index_t{64}, kWholeWindow}) {
        EXPECT_LE(relative_frobenius_error(wcsr_spmm(wcsr_from_csr(a, 64, 8), b, ts, e), want), 1e-10);
      }
    }
  }
}

TEST(SpmmProperties, BcsrInvariantUnderTileWidth) {
  for (const auto& [name, a] : gen::random_corpus(8, 24, 120)) {
    const index_t n = 9;
    const auto b = random_dense(a.n_cols(), n, 7);
    const auto bc = bcsr_from_csr(a, 4, 4);
    const auto ref = bcsr_spmm(bc, b, 1);
    for (index_t bn = 1; bn <= n + 3; ++bn) EXPECT_EQ(bcsr_spmm(bc, b, bn), ref) << name << " bn=" << bn;
  }
}

TEST(SpmmProperties, WcsrInvariantUnderTaskOrderAndSize) {
  gen::Rng rng(25);
  for (const auto& [name, a] : gen::random_corpus(8, 25, 200)) {
    const auto w = wcsr_from_csr(a, 8, 2);
    const auto b = random_dense(a.n_cols(), 6, 8);
    const auto ref = wcsr_spmm(w, b, kWholeWindow);
    for (const index_t ts : {index_t{2}, index_t{4}, index_t{16}}) {
      auto tasks = make_tasks(w, ts);
      for (int shuffle = 0; shuffle < 3; ++shuffle) {
        std::shuffle(tasks.begin(), tasks.end(), rng);
        EXPECT_LE(relative_frobenius_error(wcsr_spmm_tasks(w, b, tasks), ref), 1e-10) << name;
      }
    }
  }
}

TEST(SpmmProperties, RowPermutationCommutes) {
  for (const auto& [name, a] : gen::random_corpus(10, 26, 150)) {
    const auto p = gen::random_permutation(a.n_rows(), 9);
    const auto b = random_dense(a.n_cols(), 5, 10);
    const auto pa = apply_permutation(a, p, PermuteAxes::rows);
    EXPECT_EQ(csr_spmm(pa, b), permute_rows(csr_spmm(a, b), p)) << name;
    EXPECT_EQ(bcsr_spmm(bcsr_from_csr(pa, 4, 4), b, 3), permute_rows(bcsr_spmm(bcsr_from_csr(a, 4, 4), b, 3), p));
  }
}

TEST(Precision, F32PathAgreesLoosely) {
  const auto a = gen::random_corpus(1, 27, 100).front().matrix;
  const auto b = random_dense(a.n_cols(), 8, 11);
  const auto want = oracle(a, b);
  EXPECT_LE(relative_frobenius_error(csr_spmm(a, b, Exec::serial, Precision::f32), want), 1e-5);
  EXPECT_LE(relative_frobenius_error(bcsr_spmm(bcsr_from_csr(a, 8, 8), b, 4, Exec::parallel, Precision::f32), want),
            1e-5);
  EXPECT_LE(relative_frobenius_error(wcsr_spmm(wcsr_from_csr(a, 8, 8), b, 8, Exec::parallel, Precision::f32), want),
            1e-5);
  EXPECT_EQ(csr_spmm(a, b, Exec::serial, Precision::f32),
            dense_oracle_spmm(a.to_dense(), b, Precision::f32));
}

TEST(RandomDense, SeededAndBounded) {
  const auto a = random_dense(20, 30, 42);
  EXPECT_EQ(a, random_dense(20, 30, 42));
  EXPECT_NE(a, random_dense(20, 30, 43));
  for (const double v : a.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Errors, RelativeFrobenius) {
  const DenseMatrix z(2, 2);
  const DenseMatrix o(2, 2, 1.0);
  EXPECT_EQ(relative_frobenius_error(z, z), 0.0);
  EXPECT_EQ(relative_frobenius_error(o, z), 2.0);
  EXPECT_EQ(max_abs_error(o, z), 1.0);
  EXPECT_THROW(relative_frobenius_error(DenseMatrix(1, 2), z), std::invalid_argument);
}
