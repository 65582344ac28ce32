#include "sparselab/analysis.hpp"

#include <stdexcept>

namespace sparselab {

double throughput_tflops(double nnz, double n, double seconds) {
  if (!(seconds > 0.0)) throw std::invalid_argument("throughput: elapsed time must be positive");
  return 2.0 * nnz * n / seconds / 1e12;
}

void TileParams::validate() const {
  if (wgmma_n < kWgmmaNStep || wgmma_n > kWgmmaNMax || wgmma_n % kWgmmaNStep != 0) {
    throw std::invalid_argument("wgmma_n must be a multiple of 8 in [8, 256], got " + std::to_string(wgmma_n));
  }
  if (num_consumers < 1) throw std::invalid_argument("num_consumers must be >= 1");
}

PaddingReport padding_waste(index_t n, const TileParams& p) {
  p.validate();
  if (n < 1) throw std::invalid_argument("padding: N must be >= 1");
  PaddingReport r;
  r.n = n;
  r.wgmma_n = p.wgmma_n;
  r.bn = p.bn();
  r.padded_n = r.bn * ceil_div(n, r.bn);
  r.wasted_cols = r.padded_n - n;
  r.waste_ratio = static_cast<double>(r.wasted_cols) / static_cast<double>(n);
  return r;
}

std::vector<PaddingReport> sweep_wgmma_n(index_t n, index_t num_consumers) {
  std::vector<PaddingReport> out;
  for (index_t w = kWgmmaNStep; w <= kWgmmaNMax; w += kWgmmaNStep) out.push_back(padding_waste(n, {w, num_consumers}));
  return out;
}

index_t select_wgmma_n(index_t n, index_t num_consumers) {
  const auto sweep = sweep_wgmma_n(n, num_consumers);
  const PaddingReport* best = nullptr;
  for (const auto& r : sweep) {
    if (r.wasted_cols == 0) best = &r;
  }
  if (best != nullptr) return best->wgmma_n;
  // Compare wasted_cols / n exactly: same denominator, so compare numerators.
  for (const auto& r : sweep) {
    if (best == nullptr || r.wasted_cols <= best->wasted_cols) best = &r;
  }
  return best->wgmma_n;
}

WorkloadModel workload_from_bcsr(const BcsrMatrix& a, index_t n, const TileParams& p) {
  p.validate();
  if (n < 1) throw std::invalid_argument("workload: N must be >= 1");
  WorkloadModel w;
  if (a.nnz_blocks() == 0) return w;
  const index_t n_tiles = ceil_div(n, p.bn());
  const index_t m_tiles = a.block_rows();
  w.tiles.reserve(static_cast<std::size_t>(n_tiles * m_tiles));
  for (index_t nt = 0; nt < n_tiles; ++nt) {
    for (index_t mt = 0; mt < m_tiles; ++mt) w.tiles.push_back({mt, nt, a.blocks_in_row(mt)});
  }
  return w;
}

std::vector<AblationStage> ablation_stages(const AblationOptions& opt) {
  std::vector<AblationStage> s;
  PipelineConfig c = opt.base;
  c.scheduler = SchedulerKind::static_nonpersistent;
  c.cluster_n = 1;
  c.num_stages = 3;
  c.zero_init_latency = opt.zero_init;
  c.barrier_latency = opt.library_barrier;

  PipelineConfig opt0 = c;
  opt0.mode = PipelineMode::synchronous;
  opt0.compute_latency = opt.base.compute_latency * opt.scalar_cost_ratio;
  opt0.issue_latency = opt.cooperative_issue;
  s.push_back({"opt0", "CUDA-core", opt0});

  PipelineConfig opt1 = c;
  opt1.mode = PipelineMode::synchronous;
  opt1.issue_latency = opt.cooperative_issue;
  s.push_back({"opt1", "WGMMA", opt1});

  PipelineConfig opt2 = c;
  opt2.mode = PipelineMode::pipelined;
  opt2.issue_latency = opt.tma_issue;
  s.push_back({"opt2", "TMA", opt2});

  PipelineConfig opt3 = opt2;
  opt3.mode = PipelineMode::warp_specialized;
  s.push_back({"opt3", "warp-spec", opt3});

  PipelineConfig opt4 = opt3;
  opt4.barrier_latency = opt.raw_barrier;
  s.push_back({"opt4", "mbarrier", opt4});

  PipelineConfig opt5 = opt4;
  opt5.zero_init_latency = 0;
  s.push_back({"opt5", "misc", opt5});

  PipelineConfig opt6 = opt5;
  opt6.scheduler = SchedulerKind::persistent_static;
  s.push_back({"opt6", "persistent", opt6});

  PipelineConfig opt7 = opt5;
  opt7.cluster_n = 2;
  s.push_back({"opt7", "multicast", opt7});
  return s;
}

cycles_t AblationReport::makespan(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.stage.id == id) return e.result.makespan;
  }
  throw std::out_of_range("no ablation stage " + id);
}

AblationReport ablation_suite(const WorkloadModel& w, const AblationOptions& opt) {
  if (w.tiles.empty()) throw std::invalid_argument("ablation: workload is empty");
  AblationReport r;
  for (auto& stage : ablation_stages(opt)) {
    SimResult res = simulate(w, stage.config);
    r.entries.push_back({std::move(stage), std::move(res)});
  }
  const auto m = [&](const char* id) { return r.makespan(id); };
  r.tensor_core_gain = m("opt0") >= m("opt1");
  r.chain_holds = m("opt1") >= m("opt2") && m("opt2") >= m("opt3");
  r.barrier_gain = m("opt3") >= m("opt4");
  r.persistent_regresses = m("opt6") > m("opt5");
  r.multicast_regresses = m("opt7") > m("opt5");
  return r;
}

}  // namespace sparselab
