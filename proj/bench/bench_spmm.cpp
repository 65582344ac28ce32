// Serial reference vs OpenMP executors on a random banded matrix.

#include <benchmark/benchmark.h>

#include <random>

#include "sparselab/formats.hpp"
#include "sparselab/spmm.hpp"

using namespace sparselab;

namespace {

const CsrMatrix& matrix() {
  static const CsrMatrix a = [] {
    constexpr index_t n = 4096;
    constexpr index_t half_band = 48;
    std::mt19937_64 rng(7);
    std::bernoulli_distribution keep(0.1);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
      for (index_t j = std::max<index_t>(0, i - half_band); j < std::min(n, i + half_band + 1); ++j) {
        if (i == j || keep(rng)) t.push_back({i, j, value(rng)});
      }
    }
    return CsrMatrix::from_triplets(n, n, t);
  }();
  return a;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

void set_label(benchmark::State& state) {
  state.SetLabel(state.range(1) == 0 ? "serial" : "omp");
  state.counters["FLOP/s"] = benchmark::Counter(2.0 * static_cast<double>(matrix().nnz()) *
                                                     static_cast<double>(state.range(0)),
                                                 benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}

void BM_Csr(benchmark::State& state) {
  const auto b = random_dense(matrix().n_cols(), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(csr_spmm(matrix(), b, exec_of(state)));
  set_label(state);
}

void BM_Bcsr(benchmark::State& state) {
  const auto a = bcsr_from_csr(matrix(), 64, 64);
  const auto b = random_dense(matrix().n_cols(), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(bcsr_spmm(a, b, 64, exec_of(state)));
  set_label(state);
}

void BM_Wcsr(benchmark::State& state) {
  const auto a = wcsr_from_csr(matrix(), 64, 8);
  const auto b = random_dense(matrix().n_cols(), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(wcsr_spmm(a, b, kDefaultTaskSize, exec_of(state)));
  set_label(state);
}

}  // namespace

BENCHMARK(BM_Csr)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Bcsr)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Wcsr)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
