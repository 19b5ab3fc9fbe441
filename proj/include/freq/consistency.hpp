#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "freq/common.hpp"
#include "freq/sim.hpp"

namespace freq {

// Outcome of checking every query in a deterministic trace against its
// consistency window. An estimate for element e reported by a query that
// began at stream length n_start and ended at n_end must satisfy
//
//   f_{n_start}(e) - buffered(e) <= estimate <= f_{n_end}(e) + epsilon * n_end
//
// with buffered(e) the filter contents snapshotted at query start; and every
// element with f_{n_start}(e) > phi * n_start + buffered(e) must be reported.
struct ConsistencyResult {
  std::uint64_t queries_checked = 0;
  std::uint64_t entries_checked = 0;
  std::uint64_t violations = 0;
  // Worst signed distance into the allowed window over all entries:
  // max(estimate - f_{n_end} - epsilon*n_end, f_{n_start} - buffered - estimate).
  // Values <= 0 mean every estimate stayed inside its window.
  double max_window_slack = 0.0;
};

inline ConsistencyResult check_consistency(const SimTrace& trace, double phi, double epsilon) {
  ConsistencyResult out;
  out.max_window_slack = -std::numeric_limits<double>::infinity();
  for (const SimQueryRecord& q : trace.queries) {
    ++out.queries_checked;
    std::unordered_map<ElementId, Count> at_start;
    for (std::uint64_t i = 0; i < q.n_start; ++i) ++at_start[trace.processed[i]];
    std::unordered_map<ElementId, Count> at_end = at_start;
    for (std::uint64_t i = q.n_start; i < q.n_end; ++i) ++at_end[trace.processed[i]];

    auto buffered = [&](ElementId e) -> double {
      auto it = q.buffered_at_start.find(e);
      return it == q.buffered_at_start.end() ? 0.0 : static_cast<double>(it->second);
    };
    auto count_in = [](const std::unordered_map<ElementId, Count>& m, ElementId e) -> double {
      auto it = m.find(e);
      return it == m.end() ? 0.0 : static_cast<double>(it->second);
    };

    const double allowance = epsilon * static_cast<double>(q.n_end);
    std::unordered_map<ElementId, Count> reported;
    for (const Counter& c : q.entries) reported.emplace(c.element, c.count);

    for (const Counter& c : q.entries) {
      ++out.entries_checked;
      const double est = static_cast<double>(c.count);
      const double lower_use = count_in(at_start, c.element) - buffered(c.element) - est;
      const double upper_use = est - count_in(at_end, c.element) - allowance;
      out.max_window_slack = std::max({out.max_window_slack, lower_use, upper_use});
      if (lower_use > 1e-9 || upper_use > 1e-9) ++out.violations;
    }

    // Everything decisively frequent at query start must have been reported.
    const double start_threshold = phi * static_cast<double>(q.n_start);
    for (const auto& [e, f] : at_start) {
      if (static_cast<double>(f) > start_threshold + buffered(e) && !reported.count(e)) ++out.violations;
    }
  }
  if (out.entries_checked == 0) out.max_window_slack = 0.0;
  return out;
}

}  // namespace freq
