#pragma once

// Tile-to-SM placement policies at the level of per-tile work (block counts),
// and the A-tile traffic model for TMA multicast.

#include <vector>

#include "sparselab/pipeline_sim.hpp"

namespace sparselab {

struct Assignment {
  std::vector<std::vector<index_t>> per_sm;  // tile indices in execution order
  bool operator==(const Assignment&) const = default;
};

/// Tile indices in PID-swizzled order: strips of group_m consecutive M-tiles,
/// each strip visited column by column (M-tile fastest within a column).
std::vector<index_t> swizzled_order(const WorkloadModel& w, index_t group_m);

/// Persistent round-robin: the k-th tile of the swizzled sequence goes to SM
/// k mod n_sm.
Assignment schedule_static(const WorkloadModel& w, index_t n_sm, index_t group_m);

/// Shared fetch-and-increment counter: whenever an SM becomes idle it claims
/// the next tile in workload order. Ties go to the lowest SM id.
Assignment schedule_dynamic(const WorkloadModel& w, index_t n_sm);

struct Imbalance {
  double max_sm_work = 0.0;
  double mean_sm_work = 0.0;
  double ratio = 1.0;
};

/// Work is block_count. ratio = max / mean (1 when there is no work).
Imbalance imbalance(const Assignment& a, const WorkloadModel& w);

/// Largest per-SM sum of block counts.
index_t work_makespan(const Assignment& a, const WorkloadModel& w);

struct MulticastTraffic {
  index_t a_loads_unicast = 0;
  index_t a_loads_multicast = 0;
};

/// Clusters group tiles of one block row whose n_tile / cluster_n agree; a
/// cluster loads its A blocks once.
MulticastTraffic multicast_traffic(const WorkloadModel& w, index_t cluster_n);

}  // namespace sparselab
