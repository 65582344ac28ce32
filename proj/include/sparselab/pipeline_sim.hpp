#pragma once

// Deterministic discrete-event model of a Hopper-style SpMM pipeline.
//
// Each simulated SM runs one CTA at a time. A CTA moves tiles of A/B blocks
// through a Q-stage circular buffer guarded by full[q] / empty[q] phase-bit
// barriers:
//
//   synchronous       one actor: issue load, wait for it, compute, repeat
//   pipelined         one actor: keeps up to Q-1 loads in flight ahead of
//                     the block it is computing; issuing costs actor time
//   warp_specialized  a producer fills stages gated by empty[q]; consumers
//                     wait on full[q], compute and arrive on empty[q]
//
// The TMA unit of an SM serves one stage fill at a time (load_latency each).
// Clusters of cluster_n CTAs share A through multicast: rank 0 fills A for
// every member, each member loads its own B, and every consumer of the
// cluster arrives on every member's empty barrier.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparselab/types.hpp"

namespace sparselab {

using cycles_t = std::int64_t;

enum class PipelineMode { synchronous, pipelined, warp_specialized };
enum class SchedulerKind { static_nonpersistent, persistent_static, dynamic_counter };

struct PipelineConfig {
  PipelineMode mode = PipelineMode::warp_specialized;
  index_t num_stages = 3;
  index_t num_consumers = 2;
  cycles_t load_latency = 10;
  cycles_t compute_latency = 20;
  cycles_t store_latency = 5;
  index_t cluster_n = 1;
  SchedulerKind scheduler = SchedulerKind::static_nonpersistent;
  index_t group_m = 8;
  index_t n_sm = 132;

  // Overheads. All default to values that leave the basic timeline untouched
  // except the two persistent/cluster costs.
  cycles_t issue_latency = 0;            // issuing actor's cost per stage load
  cycles_t barrier_latency = 0;          // consumer's cost per empty-barrier arrive
  cycles_t zero_init_latency = 0;        // explicit accumulator clear per tile
  cycles_t reset_latency = 1;            // persistent schedulers: re-zero per tile
  cycles_t claim_latency = 0;            // dynamic_counter: serialized per claim
  cycles_t cluster_barrier_latency = 2;  // extra delay of a remote barrier arrive
  bool presignal_empty = true;
  bool record_trace = true;

  /// Throws std::invalid_argument.
  void validate() const;

  /// Consumers arriving on each empty barrier per CTA: num_consumers for
  /// warp_specialized, 1 for the single-actor modes.
  index_t consumers_per_cta() const {
    return mode == PipelineMode::warp_specialized ? num_consumers : 1;
  }
  index_t empty_arrival_count() const { return consumers_per_cta() * cluster_n; }
  bool persistent() const { return scheduler != SchedulerKind::static_nonpersistent; }
};

struct Tile {
  index_t m_tile = 0;
  index_t n_tile = 0;
  index_t block_count = 0;
  bool operator==(const Tile&) const = default;
};

/// Tiles in launch order.
struct WorkloadModel {
  std::vector<Tile> tiles;

  /// Throws std::invalid_argument on negative counts or duplicate coordinates.
  void validate() const;
  index_t total_blocks() const;
  bool operator==(const WorkloadModel&) const = default;
};

/// One mbarrier: flips its phase bit every arrival_count arrivals.
struct BarrierState {
  index_t arrival_count = 1;
  int phase = 0;
  index_t arrivals_so_far = 0;
  index_t completed = 0;  // total phase flips since init

  /// Returns true when this arrival completes the phase.
  bool arrive() {
    if (++arrivals_so_far < arrival_count) return false;
    arrivals_so_far = 0;
    phase ^= 1;
    ++completed;
    return true;
  }
  bool operator==(const BarrierState&) const = default;
};

enum class Unit : std::uint8_t { load, compute, store, barrier, sched };
enum class BarrierKind : std::uint8_t { full = 0, empty = 1 };

enum class EventKind : std::uint8_t {
  cta_launch,
  tile_start,
  tile_done,
  claim,
  barrier_init,    // aux = arrival count; lane = BarrierKind
  barrier_arrive,  // aux = arrivals so far after this arrive
  barrier_flip,    // aux = new phase bit
  load_issue,
  load_start,
  load_done,
  compute_start,
  compute_done,
  store_start,
  store_done,
  cta_exit,
};

struct TraceEvent {
  cycles_t time = 0;
  index_t sm = 0;
  Unit unit = Unit::sched;
  index_t lane = 0;  // consumer index; BarrierKind for barrier events
  index_t stage = -1;
  index_t tile = -1;  // -1 for cluster padding members and CTA-level events
  EventKind kind = EventKind::cta_launch;
  index_t aux = 0;
  bool operator==(const TraceEvent&) const = default;
};

struct UnitCycles {
  cycles_t load = 0;
  cycles_t compute = 0;
  cycles_t store = 0;
  bool operator==(const UnitCycles&) const = default;
};

struct UnitUtilization {
  double load = 0.0;
  double compute = 0.0;
  double store = 0.0;
  bool operator==(const UnitUtilization&) const = default;
};

struct SimResult {
  cycles_t makespan = 0;
  std::vector<UnitCycles> per_unit_busy;  // indexed by SM
  std::vector<UnitUtilization> utilization;
  std::vector<cycles_t> sm_finish;
  std::vector<index_t> tile_sm;  // SM that ran each workload tile
  std::vector<cycles_t> tile_finish;
  index_t a2_traffic = 0;  // A-tile loads that reach memory
  std::vector<TraceEvent> trace;
  bool operator==(const SimResult&) const = default;
};

struct StuckBarrier {
  index_t sm = 0;
  index_t stage = 0;
  BarrierKind kind = BarrierKind::full;
  BarrierState state;
  index_t waiters = 0;
};

/// No event can fire but work remains.
class ProtocolDeadlock : public std::runtime_error {
 public:
  ProtocolDeadlock(std::string what, std::vector<StuckBarrier> stuck)
      : std::runtime_error(std::move(what)), stuck_(std::move(stuck)) {}
  const std::vector<StuckBarrier>& stuck() const { return stuck_; }

 private:
  std::vector<StuckBarrier> stuck_;
};

/// Throws std::invalid_argument for invalid inputs, ProtocolDeadlock when the
/// barrier protocol wedges.
SimResult simulate(const WorkloadModel& w, const PipelineConfig& cfg);

struct TraceViolation {
  char rule = '?';  // 'a' premature refill, 'b' compute before fill,
                    // 'c' barrier phase accounting, 'd' arrival count
  std::size_t event_index = 0;
  std::string detail;
};

/// Replays the barrier protocol recorded in r.trace.
std::optional<TraceViolation> validate_trace(const SimResult& r, const PipelineConfig& cfg);

const char* to_string(PipelineMode m);
const char* to_string(SchedulerKind s);
const char* to_string(Unit u);
const char* to_string(EventKind k);
std::optional<PipelineMode> parse_pipeline_mode(std::string_view s);
std::optional<SchedulerKind> parse_scheduler(std::string_view s);
std::optional<Unit> parse_unit(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);

}  // namespace sparselab
