#include <map>
#include <tuple>

#include "sparselab/pipeline_sim.hpp"

namespace sparselab {

namespace {

struct Replayed {
  index_t arrival_count = 0;
  index_t arrivals = 0;
  index_t flips = 0;
};

using BarrierKey = std::tuple<index_t, index_t, index_t>;  // sm, stage, kind

TraceViolation violation(char rule, std::size_t i, std::string detail) { return {rule, i, std::move(detail)}; }

std::string where(const TraceEvent& e) {
  return "sm " + std::to_string(e.sm) + " stage " + std::to_string(e.stage) + " at cycle " + std::to_string(e.time);
}

}  // namespace

std::optional<TraceViolation> validate_trace(const SimResult& r, const PipelineConfig& cfg) {
  std::map<BarrierKey, Replayed> barriers;
  std::map<std::pair<index_t, index_t>, index_t> issues;                 // (sm, stage)
  std::map<std::tuple<index_t, index_t, index_t>, index_t> computes;     // (sm, lane, stage)
  std::optional<std::pair<BarrierKey, std::size_t>> pending_flip;

  const auto& trace = r.trace;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& e = trace[i];
    if (i > 0 && e.time < trace[i - 1].time) return violation('c', i, "trace is not time-sorted");

    const BarrierKey key{e.sm, e.stage, e.lane};
    if (pending_flip) {
      if (e.kind != EventKind::barrier_flip || key != pending_flip->first) {
        return violation('c', pending_flip->second, "arrival reached the arrival count without a phase flip");
      }
    }

    switch (e.kind) {
      case EventKind::barrier_init: {
        const auto kind = static_cast<BarrierKind>(e.lane);
        if (kind == BarrierKind::empty && e.aux != cfg.empty_arrival_count()) {
          return violation('d', i,
                           "empty barrier initialized with " + std::to_string(e.aux) + " arrivals, expected " +
                               std::to_string(cfg.empty_arrival_count()));
        }
        if (kind == BarrierKind::full) {
          const bool ok = cfg.cluster_n == 1 ? e.aux == 1 : (e.aux == 1 || e.aux == 2);
          if (!ok) return violation('d', i, "full barrier initialized with " + std::to_string(e.aux) + " arrivals");
        }
        barriers[key] = {e.aux, 0, 0};
        if (kind == BarrierKind::empty) {
          issues[{e.sm, e.stage}] = 0;
        } else {
          for (auto it = computes.begin(); it != computes.end(); ++it) {
            if (std::get<0>(it->first) == e.sm && std::get<2>(it->first) == e.stage) it->second = 0;
          }
        }
        break;
      }
      case EventKind::barrier_arrive: {
        auto it = barriers.find(key);
        if (it == barriers.end()) return violation('c', i, "arrive on uninitialized barrier, " + where(e));
        Replayed& b = it->second;
        ++b.arrivals;
        if (e.aux != b.arrivals) return violation('c', i, "arrival count mismatch, " + where(e));
        if (b.arrivals > b.arrival_count) return violation('c', i, "arrivals exceed the arrival count, " + where(e));
        if (b.arrivals == b.arrival_count) pending_flip = {key, i};
        break;
      }
      case EventKind::barrier_flip: {
        auto it = barriers.find(key);
        if (it == barriers.end()) return violation('c', i, "flip on uninitialized barrier, " + where(e));
        Replayed& b = it->second;
        if (!pending_flip || pending_flip->first != key) {
          return violation('c', i, "phase flip before the arrival count was reached, " + where(e));
        }
        pending_flip.reset();
        b.arrivals = 0;
        ++b.flips;
        if (e.aux != b.flips % 2) return violation('c', i, "phase bit does not alternate, " + where(e));
        break;
      }
      case EventKind::load_issue: {
        auto it = barriers.find({e.sm, e.stage, static_cast<index_t>(BarrierKind::empty)});
        const index_t released = it == barriers.end() ? 0 : it->second.flips;
        index_t& n = issues[{e.sm, e.stage}];
        if (n >= released) {
          return violation('a', i, "stage refilled before its consumers released it, " + where(e));
        }
        ++n;
        break;
      }
      case EventKind::compute_start: {
        auto it = barriers.find({e.sm, e.stage, static_cast<index_t>(BarrierKind::full)});
        const index_t filled = it == barriers.end() ? 0 : it->second.flips;
        index_t& n = computes[{e.sm, e.lane, e.stage}];
        if (n >= filled) return violation('b', i, "compute on a stage before its fill completed, " + where(e));
        ++n;
        break;
      }
      default:
        break;
    }
  }
  if (pending_flip) {
    return violation('c', pending_flip->second, "arrival reached the arrival count without a phase flip");
  }
  return std::nullopt;
}

}  // namespace sparselab
