#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "freq/common.hpp"

namespace freq {

// Binary min-max heap of counters (Atkinson et al. layout): even levels hold
// subtree minima, odd levels subtree maxima, so the smallest counter sits at
// slot 0 and the largest at one of its children. Backed by a dense array
// padded to a perfect tree (2^k - 1 slots), which gives every node either
// four grandchildren or none and keeps threshold scans uniform in shape.
// Padding slots start as (kNoElement, 0) counters and are consumed by
// replace_min like any other minimum.
//
// Supported mutations are replace_min and increase_count only; counts never
// decrease. An element->slot index keeps O(1) membership lookups across
// swaps.
//
// Single-owner structure: no internal synchronization.
class MinMaxHeap {
 public:
  explicit MinMaxHeap(std::uint32_t capacity) {
    if (capacity == 0) throw std::invalid_argument("MinMaxHeap: capacity must be positive");
    if (capacity > kMaxCapacity) throw std::invalid_argument("MinMaxHeap: capacity too large");
    slots_.resize(padded_capacity(capacity));
    index_.reserve(slots_.size());
  }

  // Padded slot count m'. Every slot is a usable counter.
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(slots_.size()); }

  // Occupied (non-sentinel) slots.
  std::uint32_t live() const noexcept { return static_cast<std::uint32_t>(index_.size()); }

  // The minimum counter; a sentinel with count 0 while unoccupied slots remain.
  const Counter& min() const noexcept { return slots_[0]; }

  const std::vector<Counter>& slots() const noexcept { return slots_; }

  bool contains(ElementId e) const { return index_.find(e) != index_.end(); }

  const Counter* find(ElementId e) const {
    auto it = index_.find(e);
    return it == index_.end() ? nullptr : &slots_[it->second];
  }

  // Evicts the counter at slot 0 and installs (e, count) in its place.
  // Requires count >= min().count; e must not already be tracked.
  void replace_min(ElementId e, Count count) {
    if (contains(e)) throw std::invalid_argument("MinMaxHeap: element already tracked, use increase_count");
    assert(count >= slots_[0].count);
    if (slots_[0].element != kNoElement) index_.erase(slots_[0].element);
    slots_[0] = Counter{e, count};
    index_[e] = 0;
    trickle_down(0);
  }

  // Adds w to e's count and restores the level ordering.
  void increase_count(ElementId e, Count w) {
    auto it = index_.find(e);
    if (it == index_.end()) throw std::out_of_range("MinMaxHeap: element not tracked");
    const std::uint32_t i = it->second;
    assert(slots_[i].count + w >= slots_[i].count);  // counts are monotone, overflow is a bug
    slots_[i].count += w;
    if (is_min_level(i)) {
      if (i != 0 && counter_less(slots_[parent(i)], slots_[i])) {
        // Grew past its max-level parent: the old parent value dominates the
        // whole subtree under i, so it re-settles downward while the grown
        // counter continues up the max levels.
        const std::uint32_t p = parent(i);
        swap_slots(i, p);
        trickle_down(i);
        bubble_up<false>(p);
      } else {
        trickle_down(i);
      }
    } else {
      bubble_up<false>(i);
    }
  }

  // All live counters with count strictly above `threshold`, found by
  // descending max levels from the root's children and climbing min levels
  // from the bottom with a visited set. Sets comparisons() to the number of
  // count-vs-threshold comparisons spent; at most 5*|result| + 2.
  std::vector<Counter> counters_above(Count threshold) {
    comparisons_ = 0;
    std::vector<Counter> out;
    auto exceeds = [&](std::uint32_t i) {
      ++comparisons_;
      return slots_[i].count > threshold;
    };
    const std::uint32_t m = size();
    if (m == 1) {
      if (exceeds(0)) out.push_back(slots_[0]);
      return out;
    }

    std::vector<std::uint32_t> stack;
    std::unordered_set<std::uint32_t> seen;  // min-level nodes already compared
    auto climb = [&](std::uint32_t p) {
      if (seen.insert(p).second && exceeds(p)) stack.push_back(p);
    };

    if (exceeds(1)) stack.push_back(1);
    if (exceeds(2)) stack.push_back(2);
    while (!stack.empty()) {
      const std::uint32_t i = stack.back();
      stack.pop_back();
      out.push_back(slots_[i]);
      if (!is_min_level(i)) {
        if (has_grandchildren(i)) {
          for (std::uint32_t g = grandchild(i); g < grandchild(i) + 4; ++g)
            if (exceeds(g)) stack.push_back(g);
        } else if (has_children(i)) {
          // bottom max level with leaf children on the min level below
          for (std::uint32_t c = child(i); c < child(i) + 2; ++c)
            if (exceeds(c)) stack.push_back(c);
        } else {
          // bottom max level is the leaf level; enter the min levels above
          climb(parent(i));
        }
      } else if (i >= 3) {
        climb(grandparent(i));
      }
    }
    return out;
  }

  // Count-vs-threshold comparisons performed by the most recent scan.
  std::uint64_t comparisons() const noexcept { return comparisons_; }

 private:
  static constexpr std::uint32_t kMaxCapacity = (1u << 31) - 1;

  static std::uint32_t level(std::uint32_t i) noexcept { return std::bit_width(i + 1) - 1; }
  static bool is_min_level(std::uint32_t i) noexcept { return (level(i) & 1u) == 0; }
  static std::uint32_t parent(std::uint32_t i) noexcept { return (i - 1) / 2; }
  static std::uint32_t grandparent(std::uint32_t i) noexcept { return (i - 3) / 4; }
  static std::uint32_t child(std::uint32_t i) noexcept { return 2 * i + 1; }
  static std::uint32_t grandchild(std::uint32_t i) noexcept { return 4 * i + 3; }
  bool has_children(std::uint32_t i) const noexcept { return child(i) < size(); }
  // Perfect tree: a node has either all four grandchildren or none.
  bool has_grandchildren(std::uint32_t i) const noexcept { return grandchild(i) < size(); }

  // `before` is the level-appropriate strict order: counter_less on min
  // levels, its transpose on max levels.
  template <bool kMaxLevel>
  static bool before(const Counter& a, const Counter& b) noexcept {
    if constexpr (kMaxLevel)
      return counter_less(b, a);
    else
      return counter_less(a, b);
  }

  void swap_slots(std::uint32_t a, std::uint32_t b) {
    std::swap(slots_[a], slots_[b]);
    if (slots_[a].element != kNoElement) index_[slots_[a].element] = a;
    if (slots_[b].element != kNoElement) index_[slots_[b].element] = b;
  }

  void trickle_down(std::uint32_t i) {
    if (is_min_level(i))
      trickle_down_impl<false>(i);
    else
      trickle_down_impl<true>(i);
  }

  // Re-settles an arbitrary value at i into its (otherwise valid) subtree.
  // Ascending index scans break sentinel ties toward the lower slot.
  template <bool kMaxLevel>
  void trickle_down_impl(std::uint32_t i) {
    while (has_children(i)) {
      const std::uint32_t c0 = child(i);
      std::uint32_t best = c0;
      if (before<kMaxLevel>(slots_[c0 + 1], slots_[best])) best = c0 + 1;
      bool best_is_grandchild = false;
      if (has_grandchildren(i)) {
        for (std::uint32_t g = grandchild(i); g < grandchild(i) + 4; ++g) {
          if (before<kMaxLevel>(slots_[g], slots_[best])) {
            best = g;
            best_is_grandchild = true;
          }
        }
      }
      if (!before<kMaxLevel>(slots_[best], slots_[i])) return;
      swap_slots(i, best);
      if (!best_is_grandchild) return;
      // The displaced value may outrank its new intermediate parent.
      if (before<kMaxLevel>(slots_[parent(best)], slots_[best])) swap_slots(best, parent(best));
      i = best;
    }
  }

  // Moves the value at i toward the root along its grandparent chain.
  template <bool kMinLevel>
  void bubble_up(std::uint32_t i) {
    while (i >= 3) {
      const std::uint32_t g = grandparent(i);
      if (!before<!kMinLevel>(slots_[i], slots_[g])) return;
      swap_slots(i, g);
      i = g;
    }
  }

  std::vector<Counter> slots_;
  std::unordered_map<ElementId, std::uint32_t> index_;
  std::uint64_t comparisons_ = 0;
};

}  // namespace freq
