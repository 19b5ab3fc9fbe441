#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "freq/common.hpp"
#include "freq/minmax_heap.hpp"

namespace freq {

// Number of counters that delivers estimation error at most epsilon*N.
inline std::uint32_t counters_for_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0) throw std::invalid_argument("epsilon must be in (0, 1]");
  // Guard against 1/eps landing a hair above an exact integer.
  return static_cast<std::uint32_t>(std::ceil((1.0 / epsilon) * (1.0 - 1e-12)));
}

// Space-Saving synopsis over a min-max heap: weighted updates in O(log m),
// minimum-counter lookup in O(1), and threshold queries in time proportional
// to the result set instead of the counter count. An update of an untracked
// element replaces the minimum counter and inherits its count, so the sum of
// all counts always equals the total updated weight and every tracked
// estimate overshoots its true count by at most min_count().
//
// Single-owner; the engine wraps each instance in a try-lock.
class SpaceSaving {
 public:
  explicit SpaceSaving(double epsilon, std::optional<std::uint32_t> capacity_override = std::nullopt)
      : requested_(capacity_override ? *capacity_override : counters_for_epsilon(epsilon)),
        heap_(requested_) {
    if (requested_ == 0) throw std::invalid_argument("SpaceSaving: capacity must be positive");
  }

  // Registers w simultaneous occurrences of e.
  void update(ElementId e, Count w = 1) {
    assert(e != kNoElement);
    assert(w >= 1);
    if (heap_.contains(e))
      heap_.increase_count(e, w);
    else
      heap_.replace_min(e, heap_.min().count + w);
    total_weight_ += w;
  }

  // Tracked counters with estimate strictly above `threshold`.
  std::vector<Counter> query(Count threshold) { return heap_.counters_above(threshold); }

  // F_min: the least estimate; 0 while unoccupied slots remain.
  Count min_count() const noexcept { return heap_.min().count; }

  std::uint64_t total_weight() const noexcept { return total_weight_; }

  // Usable counters (requested capacity padded to a perfect tree).
  std::uint32_t capacity() const noexcept { return heap_.size(); }

  // Capacity as requested, before padding (ceil(1/epsilon) or the override).
  std::uint32_t requested_counters() const noexcept { return requested_; }

  std::uint32_t live() const noexcept { return heap_.live(); }

  std::optional<Count> estimate_of(ElementId e) const {
    const Counter* c = heap_.find(e);
    return c ? std::optional<Count>(c->count) : std::nullopt;
  }

  const MinMaxHeap& heap() const noexcept { return heap_; }

 private:
  std::uint32_t requested_;
  MinMaxHeap heap_;
  std::uint64_t total_weight_ = 0;
};

}  // namespace freq
