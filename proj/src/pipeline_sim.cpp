#include "sparselab/pipeline_sim.hpp"

#include <algorithm>
#include <coroutine>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <tuple>

#include "sparselab/scheduling.hpp"

namespace sparselab {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("pipeline config: " + msg); };
  if (num_stages < 1) fail("num_stages must be >= 1");
  if (num_consumers < 1) fail("num_consumers must be >= 1");
  if (load_latency < 0 || compute_latency < 0 || store_latency < 0 || issue_latency < 0 || barrier_latency < 0 ||
      zero_init_latency < 0 || reset_latency < 0 || claim_latency < 0 || cluster_barrier_latency < 0) {
    fail("latencies must be >= 0");
  }
  if (cluster_n != 1 && cluster_n != 2 && cluster_n != 4 && cluster_n != 8 && cluster_n != 16) {
    fail("cluster_n must be one of 1, 2, 4, 8, 16");
  }
  if (group_m < 1) fail("group_m must be >= 1");
  if (n_sm < 1) fail("n_sm must be >= 1");
  if (n_sm < cluster_n) fail("a cluster needs cluster_n SMs but only n_sm are available");
}

void WorkloadModel::validate() const {
  std::set<std::pair<index_t, index_t>> seen;
  for (const Tile& t : tiles) {
    if (t.block_count < 0) throw std::invalid_argument("workload: negative block count");
    if (t.m_tile < 0 || t.n_tile < 0) throw std::invalid_argument("workload: negative tile coordinate");
    if (!seen.insert({t.m_tile, t.n_tile}).second) throw std::invalid_argument("workload: duplicate tile coordinates");
  }
}

index_t WorkloadModel::total_blocks() const {
  index_t sum = 0;
  for (const Tile& t : tiles) sum += t.block_count;
  return sum;
}

namespace {

// ---------------------------------------------------------------------------
// Coroutine process and event engine

struct Proc {
  struct promise_type {
    std::exception_ptr error;
    Proc get_return_object() { return Proc{std::coroutine_handle<promise_type>::from_promise(*this)}; }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
  };
  std::coroutine_handle<promise_type> handle;
};
using Handle = std::coroutine_handle<Proc::promise_type>;

/// Identity used to order simultaneous events: (sm, unit, lane).
struct Actor {
  index_t sm = 0;
  Unit unit = Unit::sched;
  index_t lane = 0;
};

struct EventKey {
  cycles_t time;
  index_t sm;
  Unit unit;
  index_t lane;
  index_t stage;
  std::uint64_t seq;

  auto tie() const { return std::tie(time, sm, unit, lane, stage, seq); }
  bool operator>(const EventKey& o) const { return tie() > o.tie(); }
};

struct Queued {
  EventKey key;
  std::function<void()> action;
  bool operator>(const Queued& o) const { return key > o.key; }
};

class Engine {
 public:
  cycles_t now() const { return now_; }

  void at(cycles_t t, const Actor& who, index_t stage, std::function<void()> fn) {
    queue_.push({{t, who.sm, who.unit, who.lane, stage, seq_++}, std::move(fn)});
  }

  void resume_at(cycles_t t, const Actor& who, index_t stage, Handle h) {
    at(t, who, stage, [h] {
      h.resume();
      if (h.done() && h.promise().error) std::rethrow_exception(h.promise().error);
    });
  }

  void run() {
    while (!queue_.empty()) {
      Queued ev = queue_.top();
      queue_.pop();
      now_ = ev.key.time;
      ev.action();
    }
  }

 private:
  cycles_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Queued, std::vector<Queued>, std::greater<>> queue_;
};

struct Waiter {
  index_t target;
  Handle handle;
  Actor actor;
  index_t stage;
};

/// A monotonically increasing count that processes can wait on.
struct Waitable {
  index_t value = 0;
  std::vector<Waiter> waiters;

  void notify(Engine& engine) {
    std::vector<Waiter> still;
    for (const auto& w : waiters) {
      if (value >= w.target) {
        engine.resume_at(engine.now(), w.actor, w.stage, w.handle);
      } else {
        still.push_back(w);
      }
    }
    waiters = std::move(still);
  }
};

struct Barrier {
  index_t sm = 0;
  index_t stage = 0;
  BarrierKind kind = BarrierKind::full;
  BarrierState state;
  Waitable flips;
};

/// Work items handed to a gang, in order; nullopt marks the end.
struct Feed {
  std::vector<std::optional<index_t>> entries;
  Waitable published;

  void publish(std::optional<index_t> item, Engine& engine) {
    entries.push_back(item);
    published.value = static_cast<index_t>(entries.size());
    published.notify(engine);
  }
};

struct Gang;

struct Cta {
  index_t sm = 0;
  index_t rank = 0;
  Gang* gang = nullptr;
  Feed* feed = nullptr;
  std::vector<Barrier> full;
  std::vector<Barrier> empty;
  cycles_t tma_free = 0;
  index_t live = 0;            // processes still running
  index_t pending_remote = 0;  // remote arrivals in flight to this CTA
  std::vector<index_t> consumers_done;  // per feed entry
};

struct Gang {
  index_t id = 0;
  index_t first_sm = 0;
  std::vector<Cta*> ctas;  // current launch, indexed by rank
  std::unique_ptr<Feed> feed;
};

struct ClusterItem {
  std::vector<index_t> member_tile;  // by rank; -1 for padding members
  index_t block_count = 0;
};

// ---------------------------------------------------------------------------
// Awaitables

struct DelayAwait {
  Engine* engine;
  Actor actor;
  index_t stage;
  cycles_t dt;
  bool await_ready() const noexcept { return false; }
  void await_suspend(Handle h) const { engine->resume_at(engine->now() + dt, actor, stage, h); }
  void await_resume() const noexcept {}
};

struct WaitAwait {
  Waitable* w;
  index_t target;
  Actor actor;
  index_t stage;
  bool await_ready() const noexcept { return w->value >= target; }
  void await_suspend(Handle h) const { w->waiters.push_back({target, h, actor, stage}); }
  void await_resume() const noexcept {}
};

// ---------------------------------------------------------------------------
// Simulator

struct Interval {
  cycles_t begin;
  cycles_t end;
};

cycles_t union_length(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  cycles_t total = 0;
  cycles_t cur_b = 0;
  cycles_t cur_e = -1;
  for (const auto& iv : v) {
    if (iv.end <= iv.begin) continue;
    if (iv.begin > cur_e) {
      if (cur_e > cur_b) total += cur_e - cur_b;
      cur_b = iv.begin;
      cur_e = iv.end;
    } else {
      cur_e = std::max(cur_e, iv.end);
    }
  }
  if (cur_e > cur_b) total += cur_e - cur_b;
  return total;
}

class Simulator {
 public:
  Simulator(const WorkloadModel& w, const PipelineConfig& cfg) : w_(w), cfg_(cfg) {
    build_items();
    const index_t n_sm = cfg.n_sm;
    result_.per_unit_busy.resize(static_cast<std::size_t>(n_sm));
    result_.utilization.resize(static_cast<std::size_t>(n_sm));
    result_.sm_finish.assign(static_cast<std::size_t>(n_sm), 0);
    result_.tile_sm.assign(w.tiles.size(), -1);
    result_.tile_finish.assign(w.tiles.size(), -1);
    busy_.resize(static_cast<std::size_t>(n_sm));
    const index_t n_gangs = n_sm / cfg.cluster_n;
    for (index_t g = 0; g < n_gangs; ++g) {
      auto gang = std::make_unique<Gang>();
      gang->id = g;
      gang->first_sm = g * cfg.cluster_n;
      gangs_.push_back(std::move(gang));
    }
  }

  ~Simulator() {
    for (auto h : handles_) h.destroy();
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimResult run() {
    start();
    engine_.run();
    if (live_total_ > 0) report_deadlock();
    finish();
    return std::move(result_);
  }

 private:
  // -- setup ---------------------------------------------------------------

  std::vector<index_t> tile_sequence() const {
    if (cfg_.scheduler == SchedulerKind::persistent_static) return swizzled_order(w_, cfg_.group_m);
    std::vector<index_t> seq(w_.tiles.size());
    for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<index_t>(i);
    return seq;
  }

  void build_items() {
    const index_t cn = cfg_.cluster_n;
    std::map<std::pair<index_t, index_t>, std::size_t> slot;
    for (const index_t t : tile_sequence()) {
      const Tile& tile = w_.tiles[static_cast<std::size_t>(t)];
      const auto key = std::make_pair(tile.m_tile, tile.n_tile / cn);
      auto it = slot.find(key);
      if (it == slot.end()) {
        it = slot.emplace(key, items_.size()).first;
        items_.push_back({std::vector<index_t>(static_cast<std::size_t>(cn), -1), tile.block_count});
      }
      ClusterItem& item = items_[it->second];
      if (item.block_count != tile.block_count) {
        throw std::invalid_argument("cluster members must share their block row's block count");
      }
      item.member_tile[static_cast<std::size_t>(tile.n_tile % cn)] = t;
    }
  }

  void start() {
    switch (cfg_.scheduler) {
      case SchedulerKind::static_nonpersistent:
        for (auto& g : gangs_) {
          Gang* gang = g.get();
          engine_.at(0, {gang->first_sm, Unit::sched, 0}, -1, [this, gang] { dispatch(*gang); });
        }
        break;
      case SchedulerKind::persistent_static: {
        const auto n_gangs = gangs_.size();
        for (auto& g : gangs_) g->feed = std::make_unique<Feed>();
        for (std::size_t i = 0; i < items_.size(); ++i) {
          gangs_[i % n_gangs]->feed->entries.emplace_back(static_cast<index_t>(i));
        }
        for (auto& g : gangs_) {
          g->feed->entries.emplace_back(std::nullopt);
          g->feed->published.value = static_cast<index_t>(g->feed->entries.size());
          Gang* gang = g.get();
          engine_.at(0, {gang->first_sm, Unit::sched, 0}, -1, [this, gang] { launch(*gang); });
        }
        break;
      }
      case SchedulerKind::dynamic_counter:
        for (auto& g : gangs_) {
          g->feed = std::make_unique<Feed>();
          Gang* gang = g.get();
          engine_.at(0, {gang->first_sm, Unit::sched, 0}, -1, [this, gang] { launch(*gang); });
        }
        break;
    }
  }

  void dispatch(Gang& gang) {
    if (next_item_ >= items_.size()) return;
    gang.feed = std::make_unique<Feed>();
    gang.feed->entries = {static_cast<index_t>(next_item_++), std::nullopt};
    gang.feed->published.value = 2;
    launch(gang);
  }

  void launch(Gang& gang) {
    const index_t cn = cfg_.cluster_n;
    const index_t q_count = cfg_.num_stages;
    gang.ctas.clear();
    for (index_t r = 0; r < cn; ++r) {
      ctas_.push_back(std::make_unique<Cta>());
      Cta& cta = *ctas_.back();
      cta.sm = gang.first_sm + r;
      cta.rank = r;
      cta.gang = &gang;
      cta.feed = gang.feed.get();
      trace({engine_.now(), cta.sm, Unit::sched, 0, -1, -1, EventKind::cta_launch, gang.id});
      const index_t full_count = (r == 0) ? 1 : 2;
      for (index_t q = 0; q < q_count; ++q) {
        Barrier f;
        f.sm = cta.sm;
        f.stage = q;
        f.kind = BarrierKind::full;
        f.state.arrival_count = full_count;
        cta.full.push_back(std::move(f));
        Barrier e;
        e.sm = cta.sm;
        e.stage = q;
        e.kind = BarrierKind::empty;
        e.state.arrival_count = cfg_.empty_arrival_count();
        cta.empty.push_back(std::move(e));
        trace({engine_.now(), cta.sm, Unit::barrier, static_cast<index_t>(BarrierKind::full), q, -1,
               EventKind::barrier_init, full_count});
        trace({engine_.now(), cta.sm, Unit::barrier, static_cast<index_t>(BarrierKind::empty), q, -1,
               EventKind::barrier_init, cfg_.empty_arrival_count()});
      }
      gang.ctas.push_back(&cta);
    }
    for (Cta* cta : gang.ctas) {
      if (cfg_.mode == PipelineMode::warp_specialized) {
        spawn(*cta, producer(*cta), {cta->sm, Unit::load, 0});
        for (index_t c = 0; c < cfg_.num_consumers; ++c) {
          spawn(*cta, consumer(*cta, c), {cta->sm, Unit::compute, c});
        }
      } else {
        spawn(*cta, single_actor(*cta), {cta->sm, Unit::compute, 0});
      }
    }
  }

  void spawn(Cta& cta, Proc p, const Actor& who) {
    handles_.push_back(p.handle);
    ++cta.live;
    ++live_total_;
    engine_.resume_at(engine_.now(), who, -1, p.handle);
  }

  // -- process helpers -------------------------------------------------------

  void trace(const TraceEvent& e) {
    if (cfg_.record_trace) result_.trace.push_back(e);
  }

  DelayAwait delay(const Actor& who, index_t stage, cycles_t dt) { return {&engine_, who, stage, dt}; }

  static WaitAwait wait_flips(Barrier& b, index_t target, const Actor& who) {
    return {&b.flips, target, who, b.stage};
  }

  void arrive(Barrier& b) {
    const index_t after = b.state.arrivals_so_far + 1;
    trace({engine_.now(), b.sm, Unit::barrier, static_cast<index_t>(b.kind), b.stage, -1, EventKind::barrier_arrive,
           after});
    if (b.state.arrive()) {
      trace({engine_.now(), b.sm, Unit::barrier, static_cast<index_t>(b.kind), b.stage, -1, EventKind::barrier_flip,
             b.state.phase});
      b.flips.value = b.state.completed;
      b.flips.notify(engine_);
    }
  }

  void arrive_remote(Cta& target, BarrierKind kind, index_t stage, cycles_t when) {
    ++target.pending_remote;
    Cta* t = &target;
    engine_.at(when, {t->sm, Unit::barrier, static_cast<index_t>(kind)}, stage, [this, t, kind, stage] {
      arrive(kind == BarrierKind::full ? t->full[static_cast<std::size_t>(stage)]
                                       : t->empty[static_cast<std::size_t>(stage)]);
      --t->pending_remote;
      maybe_retire(*t->gang);
    });
  }

  /// Consumer-side release of a stage: every CTA in the cluster is told.
  void release_stage(Cta& cta, index_t stage) {
    arrive(cta.empty[static_cast<std::size_t>(stage)]);
    for (Cta* other : cta.gang->ctas) {
      if (other != &cta) arrive_remote(*other, BarrierKind::empty, stage, engine_.now() + cfg_.cluster_barrier_latency);
    }
  }

  void start_load(Cta& cta, index_t stage, index_t tile) {
    const cycles_t now = engine_.now();
    trace({now, cta.sm, Unit::load, 0, stage, tile, EventKind::load_issue, 0});
    if (cta.rank == 0) ++result_.a2_traffic;
    const cycles_t begin = std::max(now, cta.tma_free);
    const cycles_t end = begin + cfg_.load_latency;
    cta.tma_free = end;
    busy_[static_cast<std::size_t>(cta.sm)][0].push_back({begin, end});
    Cta* c = &cta;
    const Actor who{cta.sm, Unit::load, 0};
    engine_.at(begin, who, stage, [this, c, stage, tile] {
      trace({engine_.now(), c->sm, Unit::load, 0, stage, tile, EventKind::load_start, 0});
    });
    ++cta.pending_remote;  // the in-flight transfer keeps the CTA alive
    engine_.at(end, who, stage, [this, c, stage, tile] {
      trace({engine_.now(), c->sm, Unit::load, 0, stage, tile, EventKind::load_done, 0});
      arrive(c->full[static_cast<std::size_t>(stage)]);
      if (c->rank == 0) {
        // Multicast A lands in every other member's stage.
        for (Cta* other : c->gang->ctas) {
          if (other != c) arrive_remote(*other, BarrierKind::full, stage, engine_.now() + cfg_.cluster_barrier_latency);
        }
      }
      --c->pending_remote;
      maybe_retire(*c->gang);
    });
  }

  bool is_claimer(const Cta& cta) const { return cfg_.scheduler == SchedulerKind::dynamic_counter && cta.rank == 0; }

  /// Fetch-and-increment on the global tile counter, serialized by claim_latency.
  std::pair<std::optional<index_t>, cycles_t> claim_next() {
    std::optional<index_t> item;
    if (next_item_ < items_.size()) item = static_cast<index_t>(next_item_++);
    const cycles_t served = std::max(engine_.now(), counter_free_);
    counter_free_ = served + cfg_.claim_latency;
    return {item, counter_free_};
  }

  void publish_claim(Cta& cta, std::optional<index_t> item) {
    trace({engine_.now(), cta.sm, Unit::sched, 0, -1, item ? *item : -1, EventKind::claim, 0});
    cta.feed->publish(item, engine_);
  }

  cycles_t tile_init_latency() const {
    return cfg_.zero_init_latency + (cfg_.persistent() ? cfg_.reset_latency : 0);
  }

  void consumer_finished_entry(Cta& cta, std::size_t k, index_t tile) {
    if (cta.consumers_done.size() <= k) cta.consumers_done.resize(k + 1, 0);
    if (++cta.consumers_done[k] < cfg_.consumers_per_cta()) return;
    trace({engine_.now(), cta.sm, Unit::sched, 0, -1, tile, EventKind::tile_done, 0});
    if (tile >= 0) {
      result_.tile_sm[static_cast<std::size_t>(tile)] = cta.sm;
      result_.tile_finish[static_cast<std::size_t>(tile)] = engine_.now();
    }
  }

  void exit_process(Cta& cta) {
    --cta.live;
    --live_total_;
    maybe_retire(*cta.gang);
  }

  /// A launch retires once all its processes exited and nothing is in flight.
  void maybe_retire(Gang& gang) {
    for (const Cta* c : gang.ctas) {
      if (c->live > 0 || c->pending_remote > 0) return;
    }
    if (gang.ctas.empty()) return;
    for (const Cta* c : gang.ctas) {
      trace({engine_.now(), c->sm, Unit::sched, 0, -1, -1, EventKind::cta_exit, 0});
      auto& fin = result_.sm_finish[static_cast<std::size_t>(c->sm)];
      fin = std::max(fin, engine_.now());
    }
    gang.ctas.clear();
    if (cfg_.scheduler == SchedulerKind::static_nonpersistent) {
      Gang* g = &gang;
      engine_.at(engine_.now(), {gang.first_sm, Unit::sched, 0}, -1, [this, g] { dispatch(*g); });
    }
  }

  // -- processes -------------------------------------------------------------

  Proc producer(Cta& cta) {
    const Actor me{cta.sm, Unit::load, 0};
    const index_t q_count = cfg_.num_stages;
    index_t fill = 0;
    for (std::size_t k = 0;; ++k) {
      if (is_claimer(cta) && cta.feed->entries.size() == k) {
        const auto [item, ready] = claim_next();
        co_await delay(me, -1, ready - engine_.now());
        publish_claim(cta, item);
      }
      co_await WaitAwait{&cta.feed->published, static_cast<index_t>(k + 1), me, -1};
      const auto entry = cta.feed->entries[k];
      if (!entry) break;
      const ClusterItem& item = items_[static_cast<std::size_t>(*entry)];
      const index_t tile = item.member_tile[static_cast<std::size_t>(cta.rank)];
      for (index_t b = 0; b < item.block_count; ++b, ++fill) {
        const index_t q = fill % q_count;
        co_await wait_flips(cta.empty[static_cast<std::size_t>(q)], fill / q_count + 1, me);
        if (cfg_.issue_latency > 0) co_await delay(me, q, cfg_.issue_latency);
        start_load(cta, q, tile);
      }
    }
    exit_process(cta);
  }

  Proc consumer(Cta& cta, index_t lane) {
    const Actor me{cta.sm, Unit::compute, lane};
    const index_t q_count = cfg_.num_stages;
    auto& busy = busy_[static_cast<std::size_t>(cta.sm)];
    if (cfg_.presignal_empty) {
      for (index_t q = 0; q < q_count; ++q) release_stage(cta, q);
    }
    index_t fill = 0;
    for (std::size_t k = 0;; ++k) {
      co_await WaitAwait{&cta.feed->published, static_cast<index_t>(k + 1), me, -1};
      const auto entry = cta.feed->entries[k];
      if (!entry) break;
      const ClusterItem& item = items_[static_cast<std::size_t>(*entry)];
      const index_t tile = item.member_tile[static_cast<std::size_t>(cta.rank)];
      if (lane == 0) trace({engine_.now(), cta.sm, Unit::sched, 0, -1, tile, EventKind::tile_start, 0});
      if (tile_init_latency() > 0) co_await delay(me, -1, tile_init_latency());
      for (index_t b = 0; b < item.block_count; ++b, ++fill) {
        const index_t q = fill % q_count;
        co_await wait_flips(cta.full[static_cast<std::size_t>(q)], fill / q_count + 1, me);
        trace({engine_.now(), cta.sm, Unit::compute, lane, q, tile, EventKind::compute_start, 0});
        busy[1].push_back({engine_.now(), engine_.now() + cfg_.compute_latency});
        co_await delay(me, q, cfg_.compute_latency);
        trace({engine_.now(), cta.sm, Unit::compute, lane, q, tile, EventKind::compute_done, 0});
        if (cfg_.barrier_latency > 0) co_await delay(me, q, cfg_.barrier_latency);
        release_stage(cta, q);
      }
      trace({engine_.now(), cta.sm, Unit::store, lane, -1, tile, EventKind::store_start, 0});
      busy[2].push_back({engine_.now(), engine_.now() + cfg_.store_latency});
      co_await delay({cta.sm, Unit::store, lane}, -1, cfg_.store_latency);
      trace({engine_.now(), cta.sm, Unit::store, lane, -1, tile, EventKind::store_done, 0});
      consumer_finished_entry(cta, k, tile);
    }
    exit_process(cta);
  }

  // synchronous and pipelined: one actor issues and computes.
  Proc single_actor(Cta& cta) {
    const Actor me{cta.sm, Unit::compute, 0};
    const index_t q_count = cfg_.num_stages;
    const index_t prefetch = cfg_.mode == PipelineMode::pipelined ? q_count - 1 : 0;
    auto& busy = busy_[static_cast<std::size_t>(cta.sm)];
    if (cfg_.presignal_empty) {
      for (index_t q = 0; q < q_count; ++q) release_stage(cta, q);
    }
    index_t issue_fill = 0;
    index_t use_fill = 0;
    for (std::size_t k = 0;; ++k) {
      if (is_claimer(cta) && cta.feed->entries.size() == k) {
        const auto [item, ready] = claim_next();
        co_await delay(me, -1, ready - engine_.now());
        publish_claim(cta, item);
      }
      co_await WaitAwait{&cta.feed->published, static_cast<index_t>(k + 1), me, -1};
      const auto entry = cta.feed->entries[k];
      if (!entry) break;
      const ClusterItem& item = items_[static_cast<std::size_t>(*entry)];
      const index_t tile = item.member_tile[static_cast<std::size_t>(cta.rank)];
      trace({engine_.now(), cta.sm, Unit::sched, 0, -1, tile, EventKind::tile_start, 0});
      if (tile_init_latency() > 0) co_await delay(me, -1, tile_init_latency());
      const index_t blocks = item.block_count;
      index_t issued = 0;
      for (index_t b = 0; b < blocks; ++b, ++use_fill) {
        const index_t want = std::min(blocks, b + prefetch + 1);
        while (issued < want) {
          const index_t q = issue_fill % q_count;
          co_await wait_flips(cta.empty[static_cast<std::size_t>(q)], issue_fill / q_count + 1, me);
          if (cfg_.issue_latency > 0) co_await delay(me, q, cfg_.issue_latency);
          start_load(cta, q, tile);
          ++issue_fill;
          ++issued;
        }
        const index_t q = use_fill % q_count;
        co_await wait_flips(cta.full[static_cast<std::size_t>(q)], use_fill / q_count + 1, me);
        trace({engine_.now(), cta.sm, Unit::compute, 0, q, tile, EventKind::compute_start, 0});
        busy[1].push_back({engine_.now(), engine_.now() + cfg_.compute_latency});
        co_await delay(me, q, cfg_.compute_latency);
        trace({engine_.now(), cta.sm, Unit::compute, 0, q, tile, EventKind::compute_done, 0});
        if (cfg_.barrier_latency > 0) co_await delay(me, q, cfg_.barrier_latency);
        release_stage(cta, q);
      }
      trace({engine_.now(), cta.sm, Unit::store, 0, -1, tile, EventKind::store_start, 0});
      busy[2].push_back({engine_.now(), engine_.now() + cfg_.store_latency});
      co_await delay({cta.sm, Unit::store, 0}, -1, cfg_.store_latency);
      trace({engine_.now(), cta.sm, Unit::store, 0, -1, tile, EventKind::store_done, 0});
      consumer_finished_entry(cta, k, tile);
    }
    exit_process(cta);
  }

  // -- wrap-up ---------------------------------------------------------------

  [[noreturn]] void report_deadlock() {
    std::vector<StuckBarrier> stuck;
    for (const auto& c : ctas_) {
      for (const auto* set : {&c->full, &c->empty}) {
        for (const Barrier& b : *set) {
          if (!b.flips.waiters.empty()) {
            stuck.push_back({b.sm, b.stage, b.kind, b.state, static_cast<index_t>(b.flips.waiters.size())});
          }
        }
      }
    }
    std::string msg = "protocol deadlock at cycle " + std::to_string(engine_.now()) + ": " +
                      std::to_string(live_total_) + " process(es) blocked";
    for (const auto& s : stuck) {
      msg += "; sm " + std::to_string(s.sm) + (s.kind == BarrierKind::full ? " full[" : " empty[") +
             std::to_string(s.stage) + "] phase " + std::to_string(s.state.phase) + " arrivals " +
             std::to_string(s.state.arrivals_so_far) + "/" + std::to_string(s.state.arrival_count);
    }
    throw ProtocolDeadlock(msg, std::move(stuck));
  }

  void finish() {
    result_.makespan = 0;
    for (const cycles_t f : result_.sm_finish) result_.makespan = std::max(result_.makespan, f);
    for (std::size_t s = 0; s < busy_.size(); ++s) {
      UnitCycles& u = result_.per_unit_busy[s];
      u.load = union_length(busy_[s][0]);
      u.compute = union_length(busy_[s][1]);
      u.store = union_length(busy_[s][2]);
      if (result_.makespan > 0) {
        const auto ms = static_cast<double>(result_.makespan);
        result_.utilization[s] = {static_cast<double>(u.load) / ms, static_cast<double>(u.compute) / ms,
                                  static_cast<double>(u.store) / ms};
      }
    }
  }

  const WorkloadModel& w_;
  const PipelineConfig& cfg_;
  Engine engine_;
  std::vector<ClusterItem> items_;
  std::vector<std::unique_ptr<Gang>> gangs_;
  std::deque<std::unique_ptr<Cta>> ctas_;  // kept for the whole run
  std::vector<Handle> handles_;
  std::vector<std::array<std::vector<Interval>, 3>> busy_;
  std::size_t next_item_ = 0;
  cycles_t counter_free_ = 0;
  index_t live_total_ = 0;
  SimResult result_;
};

}  // namespace

SimResult simulate(const WorkloadModel& w, const PipelineConfig& cfg) {
  cfg.validate();
  w.validate();
  Simulator sim(w, cfg);
  return sim.run();
}

// ---------------------------------------------------------------------------
// Names

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::pair<E, const char*>, N>& table) {
  for (const auto& [e, name] : table) {
    if (s == name) return e;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
const char* name_of(E e, const std::array<std::pair<E, const char*>, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<PipelineMode, const char*>, 3> kModes{{
    {PipelineMode::synchronous, "synchronous"},
    {PipelineMode::pipelined, "pipelined"},
    {PipelineMode::warp_specialized, "warp_specialized"},
}};

constexpr std::array<std::pair<SchedulerKind, const char*>, 3> kSchedulers{{
    {SchedulerKind::static_nonpersistent, "static_nonpersistent"},
    {SchedulerKind::persistent_static, "persistent_static"},
    {SchedulerKind::dynamic_counter, "dynamic_counter"},
}};

constexpr std::array<std::pair<Unit, const char*>, 5> kUnits{{
    {Unit::load, "load"},
    {Unit::compute, "compute"},
    {Unit::store, "store"},
    {Unit::barrier, "barrier"},
    {Unit::sched, "sched"},
}};

constexpr std::array<std::pair<EventKind, const char*>, 15> kKinds{{
    {EventKind::cta_launch, "cta_launch"},
    {EventKind::tile_start, "tile_start"},
    {EventKind::tile_done, "tile_done"},
    {EventKind::claim, "claim"},
    {EventKind::barrier_init, "barrier_init"},
    {EventKind::barrier_arrive, "barrier_arrive"},
    {EventKind::barrier_flip, "barrier_flip"},
    {EventKind::load_issue, "load_issue"},
    {EventKind::load_start, "load_start"},
    {EventKind::load_done, "load_done"},
    {EventKind::compute_start, "compute_start"},
    {EventKind::compute_done, "compute_done"},
    {EventKind::store_start, "store_start"},
    {EventKind::store_done, "store_done"},
    {EventKind::cta_exit, "cta_exit"},
}};

}  // namespace

const char* to_string(PipelineMode m) { return name_of(m, kModes); }
const char* to_string(SchedulerKind s) { return name_of(s, kSchedulers); }
const char* to_string(Unit u) { return name_of(u, kUnits); }
const char* to_string(EventKind k) { return name_of(k, kKinds); }
std::optional<PipelineMode> parse_pipeline_mode(std::string_view s) { return lookup(s, kModes); }
std::optional<SchedulerKind> parse_scheduler(std::string_view s) { return lookup(s, kSchedulers); }
std::optional<Unit> parse_unit(std::string_view s) { return lookup(s, kUnits); }
std::optional<EventKind> parse_event_kind(std::string_view s) { return lookup(s, kKinds); }

}  // namespace sparselab
