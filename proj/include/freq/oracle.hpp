#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "freq/common.hpp"

namespace freq {

// Exact per-element frequencies of a stream prefix of length n.
struct ExactCounts {
  std::unordered_map<ElementId, Count> counts;
  std::uint64_t n = 0;

  void add(ElementId e, Count w = 1) {
    counts[e] += w;
    n += w;
  }

  Count of(ElementId e) const {
    auto it = counts.find(e);
    return it == counts.end() ? 0 : it->second;
  }
};

inline ExactCounts exact_count(std::span<const ElementId> stream) {
  ExactCounts out;
  out.counts.reserve(1024);
  for (ElementId e : stream) out.add(e);
  return out;
}

// Plain array-backed Space-Saving, deliberately independent of the heap
// implementation: the minimum is found by linear scan under the shared
// (count, element) order, so eviction decisions match the heap's exactly.
// Equivalence oracle for the synopsis, nothing more.
class ReferenceSpaceSaving {
 public:
  explicit ReferenceSpaceSaving(std::uint32_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReferenceSpaceSaving: capacity must be positive");
  }

  void update(ElementId e, Count w = 1) {
    total_weight_ += w;
    auto it = index_.find(e);
    if (it != index_.end()) {
      counters_[it->second].count += w;
      return;
    }
    if (counters_.size() < capacity_) {
      index_[e] = counters_.size();
      counters_.push_back(Counter{e, w});
      return;
    }
    std::size_t min_at = 0;
    for (std::size_t i = 1; i < counters_.size(); ++i)
      if (counter_less(counters_[i], counters_[min_at])) min_at = i;
    index_.erase(counters_[min_at].element);
    index_[e] = min_at;
    counters_[min_at] = Counter{e, counters_[min_at].count + w};
  }

  Count min_count() const {
    if (counters_.size() < capacity_) return 0;
    Count m = counters_[0].count;
    for (const Counter& c : counters_) m = std::min(m, c.count);
    return m;
  }

  std::uint64_t total_weight() const noexcept { return total_weight_; }
  const std::vector<Counter>& counters() const noexcept { return counters_; }

 private:
  std::uint32_t capacity_;
  std::uint64_t total_weight_ = 0;
  std::vector<Counter> counters_;
  std::unordered_map<ElementId, std::size_t> index_;
};

inline std::vector<Counter> reference_space_saving(std::span<const ElementId> stream, std::uint32_t capacity) {
  ReferenceSpaceSaving ref(capacity);
  for (ElementId e : stream) ref.update(e);
  return ref.counters();
}

// Riemann zeta for a > 1: truncated series plus the closed-form midpoint
// integral tail, grown until the tail error bound a * K^-(a+1) / 24 drops
// below tol. Deterministic and dependency-free.
inline double zeta(double a, double tol = 1e-9) {
  if (!(a > 1.0)) throw std::invalid_argument("zeta: requires a > 1");
  if (!(tol > 0.0)) throw std::invalid_argument("zeta: tolerance must be positive");
  std::uint64_t k = 16;
  while (a * std::pow(static_cast<double>(k), -(a + 1.0)) / 24.0 >= tol && k < (1ull << 32)) k *= 2;
  double sum = 0.0;
  for (std::uint64_t i = 1; i <= k; ++i) sum += std::pow(static_cast<double>(i), -a);
  // tail: integral of x^-a from k + 1/2
  sum += std::pow(static_cast<double>(k) + 0.5, 1.0 - a) / (a - 1.0);
  return sum;
}

namespace detail {
// ceil/floor shielded against results that land a hair off an exact integer.
inline std::uint64_t ceil_counters(double x) {
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}
inline std::uint64_t floor_rank(double x) {
  return static_cast<std::uint64_t>(std::floor(x * (1.0 + 1e-12)));
}
}  // namespace detail

// Largest rank whose Zipf(a) frequency share exceeds phi, i.e. the number of
// phi-frequent ranks: floor((1 / (zeta(a) * phi))^(1/a)). Requires a > 1.
inline std::uint64_t rank_threshold(double skew, double phi) {
  if (!(skew > 1.0)) throw std::invalid_argument("rank_threshold: requires skew > 1");
  if (!(phi > 0.0) || phi >= 1.0) throw std::invalid_argument("rank_threshold: phi must be in (0, 1)");
  return detail::floor_rank(std::pow(1.0 / (zeta(skew) * phi), 1.0 / skew));
}

// Per-instance counters sufficient for a Zipf(a) stream split over
// `threads` ways: ceil((1 / (threads * epsilon))^(1/a)). Requires a > 1.
inline std::uint64_t zipf_counters(double skew, double epsilon, std::uint32_t threads) {
  if (!(skew > 1.0)) throw std::invalid_argument("zipf_counters: requires skew > 1");
  if (!(epsilon > 0.0) || epsilon > 1.0) throw std::invalid_argument("zipf_counters: epsilon must be in (0, 1]");
  if (threads == 0) throw std::invalid_argument("zipf_counters: threads must be positive");
  return detail::ceil_counters(std::pow(1.0 / (static_cast<double>(threads) * epsilon), 1.0 / skew));
}

struct Definition1Result {
  double recall = 1.0;
  double precision = 1.0;
  // Reported elements with true count below n * (phi - epsilon).
  std::vector<ElementId> violations;
};

// Checks a report against the approximate frequent-elements contract:
// recall over {e : f(e) > n*phi}, precision, and the list of reported
// elements whose true count falls below n*(phi - epsilon).
inline Definition1Result check_definition1(std::span<const Counter> report, const ExactCounts& truth,
                                           double phi, double epsilon) {
  Definition1Result out;
  const double n = static_cast<double>(truth.n);
  std::uint64_t true_frequent = 0;
  std::unordered_map<ElementId, bool> reported;
  reported.reserve(report.size());
  for (const Counter& c : report) reported.emplace(c.element, true);

  std::uint64_t hits = 0;
  for (const auto& [e, f] : truth.counts) {
    if (static_cast<double>(f) > n * phi) {
      ++true_frequent;
      if (reported.count(e)) ++hits;
    }
  }
  out.recall = true_frequent == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(true_frequent);

  std::uint64_t precise = 0;
  for (const auto& [e, seen] : reported) {
    const double f = static_cast<double>(truth.of(e));
    if (f > n * phi) ++precise;
    if (f < n * (phi - epsilon)) out.violations.push_back(e);
  }
  out.precision = reported.empty() ? 1.0 : static_cast<double>(precise) / static_cast<double>(reported.size());
  return out;
}

}  // namespace freq
