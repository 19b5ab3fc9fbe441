#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "freq/common.hpp"

namespace freq {

// Splits the element domain across threads: owner_of is a seeded avalanche
// mix reduced onto [0, threads) by multiply-shift (fixed choice; documented
// here because cross-run determinism matters more than the reduction style).
class OwnerMap {
 public:
  OwnerMap(std::uint32_t threads, std::uint64_t seed) : threads_(threads), seed_(seed) {
    if (threads == 0) throw std::invalid_argument("OwnerMap: threads must be positive");
  }

  std::uint32_t threads() const noexcept { return threads_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::uint32_t owner_of(ElementId e) const noexcept {
    const std::uint64_t h = mix64(e ^ seed_);
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(h) * threads_) >> 64);
  }

 private:
  std::uint32_t threads_;
  std::uint64_t seed_;
};

enum class FilterState : std::uint8_t { kOpen, kHandedOver, kEmpty };

// Fixed-capacity element->count buffer through which a source thread forwards
// occurrences to one owner thread. Ids and counts sit in two parallel arrays
// of length D; membership is a linear search, which wins while D stays small.
//
// Ownership protocol: while kOpen only the source thread touches the filter;
// hand_over() publishes it (release) and from then on only the owner reads it
// until drain() resets it and publishes kEmpty (release). The source polls
// state() (acquire) and may then reopen(). A filter sits in at most one
// pending queue at a time, via the intrusive queue_next hook.
class DelegationFilter {
 public:
  explicit DelegationFilter(std::uint32_t slots) : elements_(slots, kNoElement), counts_(slots, 0) {
    if (slots == 0) throw std::invalid_argument("DelegationFilter: slot count must be positive");
  }

  // Containers of filters are arranged once, before any concurrency.
  DelegationFilter(DelegationFilter&& other) noexcept
      : elements_(std::move(other.elements_)),
        counts_(std::move(other.counts_)),
        distinct_(other.distinct_),
        total_(other.total_),
        state_(other.state_.load(std::memory_order_relaxed)) {}
  DelegationFilter& operator=(DelegationFilter&&) = delete;

  // Source, kOpen only. Counts an occurrence of e; false when e is absent
  // and every slot is taken (the filter is left untouched).
  bool insert(ElementId e) {
    if (state_.load(std::memory_order_relaxed) != FilterState::kOpen)
      throw std::logic_error("DelegationFilter: insert into a filter that is not open");
    for (std::uint32_t i = 0; i < distinct_; ++i) {
      if (elements_[i] == e) {
        ++counts_[i];
        ++total_;
        return true;
      }
    }
    if (distinct_ == elements_.size()) return false;
    elements_[distinct_] = e;
    counts_[distinct_] = 1;
    ++distinct_;
    ++total_;
    return true;
  }

  // Source: publish to the owner.
  void hand_over() noexcept { state_.store(FilterState::kHandedOver, std::memory_order_release); }

  // Source: make a drained filter writable again.
  void reopen() noexcept { state_.store(FilterState::kOpen, std::memory_order_relaxed); }

  // Owner, kHandedOver only. Feeds every (element, count) pair to `sink`,
  // then resets the filter and publishes kEmpty.
  template <typename Sink>
  void drain(Sink&& sink) {
    if (state_.load(std::memory_order_relaxed) != FilterState::kHandedOver)
      throw std::logic_error("DelegationFilter: drain of a filter that was not handed over");
    for (std::uint32_t i = 0; i < distinct_; ++i) sink(elements_[i], counts_[i]);
    distinct_ = 0;
    total_ = 0;
    state_.store(FilterState::kEmpty, std::memory_order_release);
  }

  FilterState state(std::memory_order order = std::memory_order_acquire) const noexcept {
    return state_.load(order);
  }

  std::uint32_t distinct() const noexcept { return distinct_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint32_t slot_count() const noexcept { return static_cast<std::uint32_t>(elements_.size()); }

  // Buffered count of e. Caller must hold exclusive access (tests, snapshots).
  Count count_of(ElementId e) const {
    for (std::uint32_t i = 0; i < distinct_; ++i)
      if (elements_[i] == e) return counts_[i];
    return 0;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::uint32_t i = 0; i < distinct_; ++i) fn(elements_[i], counts_[i]);
  }

  std::atomic<DelegationFilter*> queue_next{nullptr};

 private:
  std::vector<ElementId> elements_;
  std::vector<Count> counts_;
  std::uint32_t distinct_ = 0;
  std::uint64_t total_ = 0;
  std::atomic<FilterState> state_{FilterState::kOpen};
};

// Multi-producer single-consumer hand-off of filter references: producers
// push with a CAS loop, the owner takes the whole batch at once. take_all
// returns the filters in push order, chained through queue_next.
class PendingQueue {
 public:
  PendingQueue() = default;
  PendingQueue(PendingQueue&& other) noexcept : head_(other.head_.load(std::memory_order_relaxed)) {}
  PendingQueue& operator=(PendingQueue&&) = delete;

  void push(DelegationFilter* f) noexcept {
    DelegationFilter* old = head_.load(std::memory_order_relaxed);
    do {
      f->queue_next.store(old, std::memory_order_relaxed);
    } while (!head_.compare_exchange_weak(old, f, std::memory_order_release, std::memory_order_relaxed));
  }

  DelegationFilter* take_all() noexcept {
    DelegationFilter* chain = head_.exchange(nullptr, std::memory_order_acquire);
    DelegationFilter* out = nullptr;  // reverse: LIFO chain -> push order
    while (chain) {
      DelegationFilter* next = chain->queue_next.load(std::memory_order_relaxed);
      chain->queue_next.store(out, std::memory_order_relaxed);
      out = chain;
      chain = next;
    }
    return out;
  }

  bool empty() const noexcept { return head_.load(std::memory_order_acquire) == nullptr; }

 private:
  std::atomic<DelegationFilter*> head_{nullptr};
};

// The T x T filter matrix plus the per-thread bookkeeping that rides along
// with it: one pending queue per owner, the monotone processed counters N[j]
// (written by thread j, read by anyone) and the handover window counters c[j]
// (thread-private).
class FilterMatrix {
 public:
  FilterMatrix(std::uint32_t threads, std::uint32_t filter_slots) : threads_(threads) {
    if (threads == 0) throw std::invalid_argument("FilterMatrix: threads must be positive");
    filters_.reserve(static_cast<std::size_t>(threads) * threads);
    for (std::uint32_t i = 0; i < threads * threads; ++i) filters_.emplace_back(filter_slots);
    queues_.resize(threads);
    state_ = std::vector<PerSource>(threads);
  }

  std::uint32_t threads() const noexcept { return threads_; }

  DelegationFilter& filter(std::uint32_t owner, std::uint32_t source) {
    return filters_[static_cast<std::size_t>(owner) * threads_ + source];
  }
  const DelegationFilter& filter(std::uint32_t owner, std::uint32_t source) const {
    return filters_[static_cast<std::size_t>(owner) * threads_ + source];
  }

  PendingQueue& pending(std::uint32_t owner) { return queues_[owner]; }

  void record_processed(std::uint32_t source) noexcept {
    auto& n = state_[source].processed;
    n.store(n.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
  }

  std::uint64_t processed(std::uint32_t source) const noexcept {
    return state_[source].processed.load(std::memory_order_relaxed);
  }

  std::uint64_t total_processed() const noexcept {
    std::uint64_t sum = 0;
    for (const PerSource& s : state_) sum += s.processed.load(std::memory_order_relaxed);
    return sum;
  }

  // c[j]: insertions since thread j's last completed handover round.
  std::uint64_t& handover_window(std::uint32_t source) noexcept { return state_[source].window; }

  // True while any filter sourced by j is still in flight to its owner.
  bool handover_in_flight(std::uint32_t source) const noexcept {
    for (std::uint32_t i = 0; i < threads_; ++i)
      if (filter(i, source).state() == FilterState::kHandedOver) return true;
    return false;
  }

 private:
  struct alignas(64) PerSource {
    PerSource() = default;
    PerSource(PerSource&& other) noexcept
        : processed(other.processed.load(std::memory_order_relaxed)), window(other.window) {}
    std::atomic<std::uint64_t> processed{0};
    std::uint64_t window = 0;
  };

  std::uint32_t threads_;
  std::vector<DelegationFilter> filters_;  // owner-major
  std::vector<PendingQueue> queues_;
  std::vector<PerSource> state_;
};

// True when the source's latest insert failed for lack of a slot, or when E
// or more elements were processed since the last completed handover round.
inline bool should_handover(std::uint64_t window, std::uint64_t handover_bound, bool last_insert_full) noexcept {
  return last_insert_full || window >= handover_bound;
}

}  // namespace freq
