#pragma once

#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "freq/common.hpp"
#include "freq/delegation.hpp"
#include "freq/oracle.hpp"
#include "freq/space_saving.hpp"

namespace freq {

enum class Sizing : std::uint8_t {
  kGeneral,  // ceil(1/(T*epsilon)) counters per thread
  kZipf,     // ceil((1/(T*epsilon))^(1/a)) counters per thread, a > 1
};

struct EngineConfig {
  double epsilon = 1e-4;                // approximation factor
  double phi = 1e-3;                    // support threshold (epsilon <= phi)
  std::uint32_t threads = 1;            // T
  std::uint32_t filter_slots = 16;      // D: distinct elements per filter
  std::uint64_t handover_bound = 1000;  // E: inserts per handover round, >= D
  std::uint64_t owner_seed = 0;
  Sizing sizing = Sizing::kGeneral;
  double zipf_skew = 0.0;  // a, only read under kZipf sizing

  void validate() const {
    if (!(epsilon > 0.0) || !(epsilon <= phi) || !(phi < 1.0))
      throw std::invalid_argument("EngineConfig: requires 0 < epsilon <= phi < 1");
    if (threads == 0) throw std::invalid_argument("EngineConfig: threads must be positive");
    if (filter_slots == 0) throw std::invalid_argument("EngineConfig: filter_slots must be positive");
    if (handover_bound < filter_slots)
      throw std::invalid_argument("EngineConfig: handover_bound must be at least filter_slots");
    if (sizing == Sizing::kZipf && !(zipf_skew > 1.0))
      throw std::invalid_argument("EngineConfig: zipf sizing requires skew > 1; use general sizing instead");
  }

  // Per-thread synopsis capacity before perfect-tree padding.
  std::uint32_t counters_per_thread() const {
    const double per = 1.0 / (static_cast<double>(threads) * epsilon);
    const double m = sizing == Sizing::kZipf ? std::pow(per, 1.0 / zipf_skew) : per;
    return static_cast<std::uint32_t>(detail::ceil_counters(m));
  }
};

// Frequent-elements answer of one query. Entries carry estimates strictly
// above threshold = floor(n_at_start * phi); n_at_start is the processed
// total read once when the query began.
struct QueryReport {
  std::vector<Counter> entries;
  std::uint64_t n_at_start = 0;
  Count threshold = 0;
};

// Trace sinks for deterministic runs; unused (null) under real threads.
struct EngineHooks {
  std::vector<ElementId> processed;                                // global insert order
  std::vector<std::vector<std::pair<ElementId, Count>>> delivered;  // per owner, feed order
};

// The orchestrator: T synopsis instances guarded by per-thread test-and-set
// locks, a T x T delegation-filter matrix, and per-owner pending queues.
// A source thread buffers each element in the filter reserved for it at the
// element's owner; once a filter fills up or E inserts accumulate, the
// source hands all its filters over and works off its own pending queue
// until every one of them has been drained. Queries sweep the per-thread
// synopses under try-locks, doing pending work whenever a lock is busy.
//
// The pipeline is written as re-entrant step functions (step_update,
// step_pump, step_query) so the same code runs under real threads (blocking
// wrappers below) and under a deterministic single-threaded scheduler.
class Engine {
 public:
  explicit Engine(const EngineConfig& config)
      : config_((config.validate(), config)),
        owner_(config.threads, config.owner_seed),
        matrix_(config.threads, config.filter_slots) {
    const std::uint32_t per_thread = config_.counters_per_thread();
    slots_.reserve(config_.threads);
    for (std::uint32_t i = 0; i < config_.threads; ++i)
      slots_.push_back(std::make_unique<ThreadSlot>(config_.epsilon, per_thread));
    workers_.resize(config_.threads);
  }

  const EngineConfig& config() const noexcept { return config_; }
  const OwnerMap& owner_map() const noexcept { return owner_; }
  std::uint32_t threads() const noexcept { return config_.threads; }
  std::uint32_t owner_of(ElementId e) const noexcept { return owner_.owner_of(e); }

  const SpaceSaving& synopsis(std::uint32_t i) const { return slots_[i]->synopsis; }

  std::uint64_t processed_total() const noexcept { return matrix_.total_processed(); }
  std::uint64_t processed_by(std::uint32_t j) const noexcept { return matrix_.processed(j); }

  FilterMatrix& matrix() noexcept { return matrix_; }
  const FilterMatrix& matrix() const noexcept { return matrix_; }

  // ---- blocking interface: one caller context per thread index ----

  // Processes one stream element on thread j's context. If the insert
  // triggers a handover round, works own pending updates until every
  // handed-over filter has been drained by its owner.
  void update(std::uint32_t j, ElementId e) {
    if (!matrix_.pending(j).empty()) process_pending(j);
    step_update(j, e);
    Backoff backoff;
    while (!ready(j)) {
      step_pump(j);
      backoff.wait();
    }
  }

  // Drains thread i's pending queue into its synopsis. Returns the number of
  // filters drained; 0 when the queue is empty or the try-lock is busy.
  std::size_t process_pending(std::uint32_t i) {
    if (matrix_.pending(i).empty()) return 0;
    if (!try_lock_synopsis(i)) return 0;
    std::size_t drained = 0;
    DelegationFilter* f = matrix_.pending(i).take_all();
    while (f != nullptr) {
      // read the chain link before drain() lets the source reuse the filter
      DelegationFilter* next = f->queue_next.load(std::memory_order_relaxed);
      f->drain([&](ElementId e, Count w) {
        slots_[i]->synopsis.update(e, w);
        if (hooks_) hooks_->delivered[i].emplace_back(e, w);
      });
      ++drained;
      f = next;
    }
    unlock_synopsis(i);
    return drained;
  }

  // Frequent-elements query from thread q's context; runs concurrently with
  // updates and other queries.
  QueryReport query(std::uint32_t q) {
    QueryProbe probe;
    Backoff backoff;
    while (!step_query(q, probe)) backoff.wait();
    return std::move(probe.report);
  }

  // End-of-stream for worker j: hand over whatever is buffered and drain own
  // pending work until every handed-over filter has emptied.
  void finish_worker(std::uint32_t j) {
    Backoff backoff;
    while (!ready(j)) {
      step_pump(j);
      backoff.wait();
    }
    begin_handover(j);
    while (!ready(j)) {
      step_pump(j);
      backoff.wait();
    }
  }

  // Quiescent flush: hands over and drains everything. Callers must have
  // stopped all worker threads first.
  void flush() {
    for (;;) {
      bool busy = false;
      for (std::uint32_t j = 0; j < threads(); ++j) {
        if (!ready(j)) {
          step_pump(j);
          busy = true;
        }
      }
      for (std::uint32_t i = 0; i < threads(); ++i) busy |= process_pending(i) > 0;
      for (std::uint32_t j = 0; j < threads(); ++j) {
        if (ready(j) && column_holds_counts(j)) {
          begin_handover(j);
          busy = true;
        }
      }
      if (!busy && all_queues_empty()) return;
    }
  }

  // ---- cooperative steps (deterministic scheduler, custom drivers) ----

  // True when thread j has no handover round in flight.
  bool ready(std::uint32_t j) const noexcept { return workers_[j].phase == Phase::kReady; }

  // Feeds e into thread j's pipeline. Requires ready(j). May leave the
  // thread in a draining round; pump with step_pump until ready again.
  void step_update(std::uint32_t j, ElementId e) {
    assert(ready(j));
    assert(e != kNoElement);
    insert_or_trigger(j, e);
  }

  // Advances thread j's handover round: drains own pending work, completes
  // the round once all handed-over filters are empty, and retries the
  // stashed element of a full-filter trigger.
  void step_pump(std::uint32_t j) {
    assert(!ready(j));
    process_pending(j);
    if (matrix_.handover_in_flight(j)) return;
    matrix_.handover_window(j) = 0;
    workers_[j].phase = Phase::kReady;
    if (workers_[j].stash) {
      const ElementId e = *workers_[j].stash;
      workers_[j].stash.reset();
      insert_or_trigger(j, e);
    }
  }

  struct QueryProbe {
    bool active = false;
    std::uint32_t next = 0;
    QueryReport report;
  };

  // One query step: activation reads the processed total and fixes the
  // threshold; each later step scans one synopsis under its try-lock or, on
  // contention, works the querier's own pending queue. Returns true when the
  // report is complete.
  bool step_query(std::uint32_t q, QueryProbe& probe) {
    if (!probe.active) {
      probe.active = true;
      probe.next = 0;
      probe.report.n_at_start = matrix_.total_processed();
      probe.report.threshold =
          static_cast<Count>(std::floor(static_cast<double>(probe.report.n_at_start) * config_.phi));
      return false;
    }
    const std::uint32_t i = probe.next;
    if (try_lock_synopsis(i)) {
      std::vector<Counter> part = slots_[i]->synopsis.query(probe.report.threshold);
      unlock_synopsis(i);
      probe.report.entries.insert(probe.report.entries.end(), part.begin(), part.end());
      ++probe.next;
    } else if (q < threads()) {
      process_pending(q);
    }
    return probe.next == threads();
  }

  bool try_lock_synopsis(std::uint32_t i) noexcept {
    return !slots_[i]->lock.test_and_set(std::memory_order_acquire);
  }
  void unlock_synopsis(std::uint32_t i) noexcept { slots_[i]->lock.clear(std::memory_order_release); }

  // Sum of buffered counts per element across the whole filter matrix.
  // Single-threaded use only (deterministic runs, quiescent checks).
  std::unordered_map<ElementId, Count> buffered_counts() const {
    std::unordered_map<ElementId, Count> out;
    for (std::uint32_t i = 0; i < threads(); ++i)
      for (std::uint32_t j = 0; j < threads(); ++j)
        matrix_.filter(i, j).for_each([&](ElementId e, Count w) { out[e] += w; });
    return out;
  }

  void set_hooks(EngineHooks* hooks) {
    hooks_ = hooks;
    if (hooks_ && hooks_->delivered.size() != threads()) hooks_->delivered.resize(threads());
  }

 private:
  enum class Phase : std::uint8_t { kReady, kDraining };

  struct alignas(64) ThreadSlot {
    ThreadSlot(double epsilon, std::uint32_t capacity) : synopsis(epsilon, capacity) {}
    SpaceSaving synopsis;
    std::atomic_flag lock = ATOMIC_FLAG_INIT;
  };

  struct WorkerState {
    Phase phase = Phase::kReady;
    std::optional<ElementId> stash;  // element awaiting retry after a full-filter handover
  };

  void insert_or_trigger(std::uint32_t j, ElementId e) {
    DelegationFilter& f = matrix_.filter(owner_of(e), j);
    if (f.state() == FilterState::kEmpty) f.reopen();
    if (f.insert(e)) {
      matrix_.record_processed(j);
      if (hooks_) hooks_->processed.push_back(e);
      if (should_handover(++matrix_.handover_window(j), config_.handover_bound, false)) begin_handover(j);
    } else {
      workers_[j].stash = e;
      begin_handover(j);
    }
  }

  void begin_handover(std::uint32_t j) {
    for (std::uint32_t i = 0; i < threads(); ++i) {
      DelegationFilter& f = matrix_.filter(i, j);
      if (f.state(std::memory_order_relaxed) == FilterState::kOpen && f.distinct() > 0) {
        f.hand_over();
        matrix_.pending(i).push(&f);
      }
    }
    workers_[j].phase = Phase::kDraining;
  }

  bool column_holds_counts(std::uint32_t j) const {
    for (std::uint32_t i = 0; i < threads(); ++i) {
      const DelegationFilter& f = matrix_.filter(i, j);
      if (f.state(std::memory_order_relaxed) == FilterState::kOpen && f.distinct() > 0) return true;
    }
    return false;
  }

  bool all_queues_empty() {
    for (std::uint32_t i = 0; i < threads(); ++i)
      if (!matrix_.pending(i).empty()) return false;
    return true;
  }

  EngineConfig config_;
  OwnerMap owner_;
  FilterMatrix matrix_;
  std::vector<std::unique_ptr<ThreadSlot>> slots_;
  std::vector<WorkerState> workers_;
  EngineHooks* hooks_ = nullptr;
};

}  // namespace freq
