#include <gtest/gtest.h>

#include "sparselab/analysis.hpp"
#include "support/generators.hpp"

using namespace sparselab;

TEST(Throughput, Formula) {
  EXPECT_EQ(throughput_tflops(1, 1, 2e-12), 1.0);
  EXPECT_DOUBLE_EQ(throughput_tflops(1e6, 1024, 1e-3), 2.048);
  EXPECT_EQ(throughput_tflops(0, 1024, 1.0), 0.0);
  EXPECT_THROW(throughput_tflops(1, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(throughput_tflops(1, 1, -1.0), std::invalid_argument);
}

TEST(Throughput, ScalesLinearly) {
  gen::Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    const auto nnz = static_cast<double>(gen::uniform_int(rng, 0, 1 << 24));
    const auto n = static_cast<double>(gen::uniform_int(rng, 1, 4096));
    const double t = std::uniform_real_distribution<double>(1e-6, 1.0)(rng);
    const double base = throughput_tflops(nnz, n, t);
    // Power-of-two scaling is exact in binary floating point.
    EXPECT_EQ(throughput_tflops(2 * nnz, n, t), 2 * base);
    EXPECT_EQ(throughput_tflops(nnz, 4 * n, t), 4 * base);
    EXPECT_EQ(throughput_tflops(nnz, n, 2 * t), base / 2);
  }
}

TEST(TileParamsTest, Validation) {
  EXPECT_EQ((TileParams{256, 2}).bn(), 512);
  EXPECT_THROW((TileParams{0, 2}).validate(), std::invalid_argument);
  EXPECT_THROW((TileParams{12, 2}).validate(), std::invalid_argument);
  EXPECT_THROW((TileParams{264, 2}).validate(), std::invalid_argument);
  EXPECT_THROW((TileParams{8, 0}).validate(), std::invalid_argument);
}

TEST(Padding, PublishedCases) {
  const auto full = padding_waste(1024, {256, 2});
  EXPECT_EQ(full.bn, 512);
  EXPECT_EQ(full.padded_n, 1024);
  EXPECT_EQ(full.wasted_cols, 0);

  const auto w248 = padding_waste(1024, {248, 2});
  EXPECT_EQ(w248.bn, 496);
  EXPECT_EQ(w248.padded_n, 1488);
  EXPECT_EQ(w248.wasted_cols, 464);
  EXPECT_EQ(w248.waste_ratio, 464.0 / 1024.0);

  const auto w176 = padding_waste(1024, {176, 2});
  EXPECT_EQ(w176.bn, 352);
  EXPECT_EQ(w176.padded_n, 1056);
  EXPECT_EQ(w176.wasted_cols, 32);
  EXPECT_EQ(w176.waste_ratio, 32.0 / 1024.0);

  EXPECT_THROW(padding_waste(0, {8, 2}), std::invalid_argument);
}

TEST(Padding, SweepZeroWasteSet) {
  const auto rows = sweep_wgmma_n(1024, 2);
  ASSERT_EQ(rows.size(), 32u);
  std::vector<index_t> zero;
  for (const auto& r : rows) {
    if (r.wasted_cols == 0) zero.push_back(r.wgmma_n);
  }
  EXPECT_EQ(zero, (std::vector<index_t>{8, 16, 32, 64, 128, 256}));
  for (const auto& r : sweep_wgmma_n(1, 2)) EXPECT_EQ(r.padded_n, r.bn);
  for (const auto& r : sweep_wgmma_n(96, 2)) {
    if (r.bn == 96) {
      EXPECT_EQ(r.wasted_cols, 0);
    }
  }
}

TEST(Padding, ZeroWasteIffDivides) {
  for (index_t n = 1; n <= 1200; n += 7) {
    for (const auto& r : sweep_wgmma_n(n, 3)) {
      EXPECT_EQ(r.wasted_cols == 0, n % r.bn == 0);
      EXPECT_GE(r.padded_n, n);
      EXPECT_EQ(r.padded_n % r.bn, 0);
      EXPECT_LT(r.padded_n - n, r.bn);
    }
  }
}

TEST(Select, Examples) {
  EXPECT_EQ(select_wgmma_n(1024, 2), 256);
  EXPECT_EQ(select_wgmma_n(96, 2), 48);
  // N=10: every BN >= 16 exceeds N; BN=16 wastes the least (6 columns).
  EXPECT_EQ(select_wgmma_n(10, 2), 8);
}

TEST(Select, MinimalWasteExhaustive) {
  for (index_t n = 1; n <= 2048; n += 3) {
    for (const index_t c : {1, 2, 3}) {
      const index_t pick = select_wgmma_n(n, c);
      const auto rows = sweep_wgmma_n(n, c);
      index_t best = std::numeric_limits<index_t>::max();
      for (const auto& r : rows) best = std::min(best, r.wasted_cols);
      const auto chosen = padding_waste(n, {pick, c});
      EXPECT_EQ(chosen.wasted_cols, best) << n << " " << c;
      for (const auto& r : rows) {
        if (r.wasted_cols == best) {
          EXPECT_LE(r.wgmma_n, pick);
        }
      }
    }
  }
}

TEST(Workload, FromBcsr) {
  const auto b = bcsr_from_csr(gen::small_example(), 2, 2);
  const auto w = workload_from_bcsr(b, 4, {8, 1});  // BN=8 > N: one n tile
  EXPECT_EQ(w.tiles.size(), 2u);
  const auto w2 = workload_from_bcsr(b, 16, {8, 1});
  ASSERT_EQ(w2.tiles.size(), 4u);
  EXPECT_EQ(w2.tiles[0], (Tile{0, 0, 1}));
  EXPECT_EQ(w2.tiles[1], (Tile{1, 0, 1}));
  EXPECT_EQ(w2.tiles[2], (Tile{0, 1, 1}));
  EXPECT_TRUE(workload_from_bcsr(bcsr_from_csr(CsrMatrix::from_triplets(4, 4, {}), 2, 2), 4, {8, 1}).tiles.empty());
  const auto single = workload_from_bcsr(bcsr_from_csr(gen::small_example(), 4, 4), 16, {8, 2});
  EXPECT_EQ(single.tiles.size(), 1u);
}

TEST(Workload, ConservesBlocks) {
  for (const auto& [name, a] : gen::random_corpus(20, 52, 300)) {
    const auto b = bcsr_from_csr(a, 16, 16);
    for (const index_t n : {1, 64, 100, 1024}) {
      const TileParams p{16, 2};
      const auto w = workload_from_bcsr(b, n, p);
      if (b.nnz_blocks() == 0) continue;
      EXPECT_EQ(w.total_blocks(), b.nnz_blocks() * ceil_div(n, p.bn())) << name;
    }
  }
}

TEST(Ablation, StagesCoverEightIds) {
  const auto s = ablation_stages();
  ASSERT_EQ(s.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(s[i].id, "opt" + std::to_string(i));
  EXPECT_EQ(s[1].config.mode, PipelineMode::synchronous);
  EXPECT_EQ(s[2].config.mode, PipelineMode::pipelined);
  EXPECT_EQ(s[3].config.mode, PipelineMode::warp_specialized);
  EXPECT_EQ(s[6].config.scheduler, SchedulerKind::persistent_static);
  EXPECT_EQ(s[7].config.cluster_n, 2);
  EXPECT_GT(s[0].config.compute_latency, s[1].config.compute_latency);
}

TEST(Ablation, BalancedWorkloadChain) {
  const auto w = gen::grid_workload(std::vector<index_t>(40, 6), 4);
  const auto r = ablation_suite(w);
  EXPECT_TRUE(r.chain_holds);
  EXPECT_TRUE(r.tensor_core_gain);
  EXPECT_TRUE(r.barrier_gain);
  EXPECT_LE(r.makespan("opt3"), r.makespan("opt2"));
}

TEST(Ablation, SkewedWorkloadPersistentRegresses) {
  // Two heavy tiles one round apart land on the same SM under round-robin.
  std::vector<index_t> counts(264, 1);
  counts[0] = 100;
  counts[132] = 100;
  const auto r = ablation_suite(gen::grid_workload(counts, 1));
  EXPECT_TRUE(r.persistent_regresses);
  EXPECT_GT(r.makespan("opt6"), r.makespan("opt5"));
}

TEST(Ablation, SingleTilePersistentWithinReset) {
  const auto r = ablation_suite(gen::grid_workload({7}, 1));
  const AblationOptions opt;
  EXPECT_LE(r.makespan("opt6") - r.makespan("opt5"), opt.base.reset_latency);
  EXPECT_GE(r.makespan("opt6"), r.makespan("opt5"));
}

TEST(Ablation, EmptyWorkloadRejected) { EXPECT_THROW(ablation_suite(WorkloadModel{}), std::invalid_argument); }
