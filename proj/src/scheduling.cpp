#include "sparselab/scheduling.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

namespace sparselab {

std::vector<index_t> swizzled_order(const WorkloadModel& w, index_t group_m) {
  if (group_m < 1) throw std::invalid_argument("group_m must be >= 1");
  std::vector<index_t> order(w.tiles.size());
  std::iota(order.begin(), order.end(), index_t{0});
  auto key = [&](index_t t) {
    const Tile& tile = w.tiles[static_cast<std::size_t>(t)];
    return std::make_tuple(tile.m_tile / group_m, tile.n_tile, tile.m_tile);
  };
  std::stable_sort(order.begin(), order.end(), [&](index_t x, index_t y) { return key(x) < key(y); });
  return order;
}

Assignment schedule_static(const WorkloadModel& w, index_t n_sm, index_t group_m) {
  if (n_sm < 1) throw std::invalid_argument("n_sm must be >= 1");
  w.validate();
  Assignment a;
  a.per_sm.resize(static_cast<std::size_t>(n_sm));
  const auto order = swizzled_order(w, group_m);
  for (std::size_t k = 0; k < order.size(); ++k) {
    a.per_sm[k % static_cast<std::size_t>(n_sm)].push_back(order[k]);
  }
  return a;
}

Assignment schedule_dynamic(const WorkloadModel& w, index_t n_sm) {
  if (n_sm < 1) throw std::invalid_argument("n_sm must be >= 1");
  w.validate();
  Assignment a;
  a.per_sm.resize(static_cast<std::size_t>(n_sm));
  // (time the SM becomes idle, SM id): earliest first, then lowest id.
  using Slot = std::pair<index_t, index_t>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> idle;
  for (index_t s = 0; s < n_sm; ++s) idle.emplace(0, s);
  for (std::size_t t = 0; t < w.tiles.size(); ++t) {
    const auto [when, sm] = idle.top();
    idle.pop();
    a.per_sm[static_cast<std::size_t>(sm)].push_back(static_cast<index_t>(t));
    idle.emplace(when + w.tiles[t].block_count, sm);
  }
  return a;
}

namespace {

std::vector<index_t> sm_work(const Assignment& a, const WorkloadModel& w) {
  std::vector<index_t> work;
  std::vector<bool> seen(w.tiles.size(), false);
  for (const auto& list : a.per_sm) {
    index_t sum = 0;
    for (const index_t t : list) {
      if (t < 0 || static_cast<std::size_t>(t) >= w.tiles.size() || seen[static_cast<std::size_t>(t)]) {
        throw std::invalid_argument("assignment references an unknown or repeated tile");
      }
      seen[static_cast<std::size_t>(t)] = true;
      sum += w.tiles[static_cast<std::size_t>(t)].block_count;
    }
    work.push_back(sum);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::invalid_argument("assignment does not cover every tile");
  }
  return work;
}

}  // namespace

Imbalance imbalance(const Assignment& a, const WorkloadModel& w) {
  if (a.per_sm.empty()) throw std::invalid_argument("assignment has no SMs");
  const auto work = sm_work(a, w);
  Imbalance out;
  out.max_sm_work = static_cast<double>(*std::max_element(work.begin(), work.end()));
  out.mean_sm_work = static_cast<double>(std::accumulate(work.begin(), work.end(), index_t{0})) /
                     static_cast<double>(work.size());
  out.ratio = out.mean_sm_work > 0.0 ? out.max_sm_work / out.mean_sm_work : 1.0;
  return out;
}

index_t work_makespan(const Assignment& a, const WorkloadModel& w) {
  const auto work = sm_work(a, w);
  return work.empty() ? 0 : *std::max_element(work.begin(), work.end());
}

MulticastTraffic multicast_traffic(const WorkloadModel& w, index_t cluster_n) {
  if (cluster_n < 1) throw std::invalid_argument("cluster_n must be >= 1");
  MulticastTraffic out;
  std::map<std::pair<index_t, index_t>, index_t> shared;
  for (const Tile& t : w.tiles) {
    out.a_loads_unicast += t.block_count;
    auto& slot = shared[{t.m_tile, t.n_tile / cluster_n}];
    slot = std::max(slot, t.block_count);
  }
  for (const auto& [key, count] : shared) out.a_loads_multicast += count;
  return out;
}

}  // namespace sparselab
