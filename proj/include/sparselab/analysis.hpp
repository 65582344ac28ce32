#pragma once

// Throughput metric, WGMMA tile-width padding, workload extraction and the
// opt0..opt7 ablation ladder over simulator configurations.

#include <string>
#include <vector>

#include "sparselab/formats.hpp"
#include "sparselab/pipeline_sim.hpp"

namespace sparselab {

/// 2 * nnz * n / seconds / 1e12. Throws std::invalid_argument unless seconds > 0.
double throughput_tflops(double nnz, double n, double seconds);

inline constexpr index_t kWgmmaNStep = 8;
inline constexpr index_t kWgmmaNMax = 256;

struct TileParams {
  index_t wgmma_n = 256;
  index_t num_consumers = 2;

  index_t bn() const { return wgmma_n * num_consumers; }
  /// wgmma_n in {8, 16, ..., 256} and num_consumers >= 1, else std::invalid_argument.
  void validate() const;
};

struct PaddingReport {
  index_t n = 0;
  index_t wgmma_n = 0;
  index_t bn = 0;
  index_t padded_n = 0;
  index_t wasted_cols = 0;   // padded_n - n
  double waste_ratio = 0.0;  // wasted_cols / n
};

PaddingReport padding_waste(index_t n, const TileParams& p);

/// One report per wgmma_n in {8, 16, ..., 256}.
std::vector<PaddingReport> sweep_wgmma_n(index_t n, index_t num_consumers);

/// Largest wgmma_n whose BN divides n; otherwise the least wasteful, ties to
/// the larger width.
index_t select_wgmma_n(index_t n, index_t num_consumers);

/// One tile per (block row, n tile), n tiles outermost. block_count is the
/// block row's stored block count.
WorkloadModel workload_from_bcsr(const BcsrMatrix& a, index_t n, const TileParams& p);

struct AblationOptions {
  PipelineConfig base;             // latencies, n_sm, group_m, reset/claim costs
  index_t scalar_cost_ratio = 8;   // opt0 compute cost relative to tensor cores
  cycles_t cooperative_issue = 4;  // opt0/opt1: all threads compute addresses
  cycles_t tma_issue = 1;          // opt2+: single-thread descriptor issue
  cycles_t library_barrier = 4;    // opt0..opt3 arrive cost
  cycles_t raw_barrier = 1;        // opt4+: one arrive per warpgroup
  cycles_t zero_init = 2;          // opt0..opt4: explicit accumulator clear
};

struct AblationStage {
  std::string id;
  std::string label;
  PipelineConfig config;
};

/// The eight stages; opt6 and opt7 each branch from opt5.
std::vector<AblationStage> ablation_stages(const AblationOptions& opt = {});

struct AblationEntry {
  AblationStage stage;
  SimResult result;
};

struct AblationReport {
  std::vector<AblationEntry> entries;
  bool chain_holds = false;        // opt1 >= opt2 >= opt3 in makespan
  bool tensor_core_gain = false;   // opt0 >= opt1
  bool barrier_gain = false;       // opt3 >= opt4
  bool persistent_regresses = false;  // opt6 > opt5
  bool multicast_regresses = false;   // opt7 > opt5

  cycles_t makespan(const std::string& id) const;
};

/// Throws std::invalid_argument on an empty workload.
AblationReport ablation_suite(const WorkloadModel& w, const AblationOptions& opt = {});

}  // namespace sparselab
