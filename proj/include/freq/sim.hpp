#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "freq/engine.hpp"

namespace freq {

enum class SimAction : std::uint8_t {
  kUpdate,          // advance thread j's update pipeline by one step
  kProcessPending,  // one process_pending call on thread j
  kQueryStep,       // advance thread j's in-flight query by one step
};

struct SimOp {
  std::uint32_t thread = 0;
  SimAction action = SimAction::kUpdate;
};

struct SimQueryRecord {
  std::uint64_t n_start = 0;  // processed total when the query began
  std::uint64_t n_end = 0;    // processed total when the report completed
  Count threshold = 0;
  std::vector<Counter> entries;
  // Buffered filter counts per element, snapshotted at query start.
  std::unordered_map<ElementId, Count> buffered_at_start;
};

struct SimTrace {
  // Every element in global insert order; prefix counts give f_N(e).
  std::vector<ElementId> processed;
  // Weighted pairs in the order each owner synopsis consumed them.
  std::vector<std::vector<std::pair<ElementId, Count>>> delivered;
  std::vector<SimQueryRecord> queries;
  std::uint64_t steps = 0;
};

// Runs the engine pipeline as cooperative steps under a fixed interleaving
// script, single-threaded. Each thread consumes its own input sequence; an
// update step on a thread with a handover round in flight pumps the round
// instead (the thread is blocked-with-work). Replayable bit for bit from
// (config, streams, script). `on_step` (optional) observes the engine after
// every executed step. With flush_at_end the quiescent flush runs inside the
// traced window, so delivered[] covers every count.
inline SimTrace run_deterministic(Engine& eng, std::span<const SimOp> script,
                                  const std::vector<std::vector<ElementId>>& streams,
                                  const std::function<void(const Engine&, std::uint64_t)>& on_step = {},
                                  bool flush_at_end = false) {
  const std::uint32_t t = eng.threads();
  if (streams.size() != t) throw std::invalid_argument("run_deterministic: need one input sequence per thread");
  for (const SimOp& op : script)
    if (op.thread >= t) throw std::invalid_argument("run_deterministic: script references an out-of-range thread");

  EngineHooks hooks;
  eng.set_hooks(&hooks);

  std::vector<std::size_t> cursor(t, 0);
  std::vector<Engine::QueryProbe> probes(t);
  std::vector<SimQueryRecord> pending_records(t);

  SimTrace trace;
  for (const SimOp& op : script) {
    const std::uint32_t j = op.thread;
    switch (op.action) {
      case SimAction::kUpdate:
        if (!eng.ready(j))
          eng.step_pump(j);
        else if (cursor[j] < streams[j].size())
          eng.step_update(j, streams[j][cursor[j]++]);
        break;
      case SimAction::kProcessPending:
        eng.process_pending(j);
        break;
      case SimAction::kQueryStep: {
        const bool starting = !probes[j].active;
        const bool done = eng.step_query(j, probes[j]);
        if (starting) {
          pending_records[j] = SimQueryRecord{};
          pending_records[j].n_start = probes[j].report.n_at_start;
          pending_records[j].threshold = probes[j].report.threshold;
          pending_records[j].buffered_at_start = eng.buffered_counts();
        }
        if (done) {
          pending_records[j].n_end = eng.processed_total();
          pending_records[j].entries = std::move(probes[j].report.entries);
          trace.queries.push_back(std::move(pending_records[j]));
          probes[j] = Engine::QueryProbe{};
        }
        break;
      }
    }
    ++trace.steps;
    if (on_step) on_step(eng, trace.steps);
  }

  if (flush_at_end) eng.flush();
  eng.set_hooks(nullptr);
  trace.processed = std::move(hooks.processed);
  trace.delivered = std::move(hooks.delivered);
  return trace;
}

// Feeds a partitioned stream through the pipeline single-threaded:
// round-robin update steps with pending sweeps every iteration, until every
// element is consumed and every round has completed, then a flush.
// Deterministic. (The blocking Engine API needs one real thread per context
// and would stall here.)
inline void drive_to_quiescence(Engine& eng, const std::vector<std::vector<ElementId>>& streams) {
  const std::uint32_t t = eng.threads();
  if (streams.size() != t) throw std::invalid_argument("drive_to_quiescence: need one input sequence per thread");
  std::vector<std::size_t> cur(t, 0);
  for (;;) {
    bool all_done = true;
    for (std::uint32_t j = 0; j < t; ++j) {
      if (!eng.ready(j)) {
        eng.step_pump(j);
        all_done = false;
      } else if (cur[j] < streams[j].size()) {
        eng.step_update(j, streams[j][cur[j]++]);
        all_done = false;
      }
    }
    for (std::uint32_t i = 0; i < t; ++i) eng.process_pending(i);
    if (all_done) break;
  }
  eng.flush();
}

// Seeded random interleaving: biased update steps across threads with
// occasional pending sweeps, plus `queries` fully driven queries at random
// positions, each one interleaved with updates on the other threads. A query
// takes threads+1 consecutive steps on its thread (locks never fail in a
// single-threaded run), so every started query completes.
inline std::vector<SimOp> random_interleaving_script(std::uint32_t threads, std::uint64_t steps,
                                                     std::uint32_t queries, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<SimOp> script;
  script.reserve(steps + static_cast<std::uint64_t>(queries) * (threads + 1) * 4);
  std::vector<std::uint64_t> query_at(queries);
  const std::uint64_t span = std::max<std::uint64_t>(1, steps - steps / 4);
  for (auto& at : query_at) at = steps / 4 + rng.next_below(span);
  std::sort(query_at.begin(), query_at.end());

  std::size_t next_query = 0;
  for (std::uint64_t s = 0; s < steps; ++s) {
    while (next_query < query_at.size() && query_at[next_query] == s) {
      const std::uint32_t q = static_cast<std::uint32_t>(rng.next_below(threads));
      for (std::uint32_t step = 0; step < threads + 1; ++step) {
        script.push_back({q, SimAction::kQueryStep});
        const std::uint64_t gap = rng.next_below(4);
        for (std::uint64_t g = 0; g < gap; ++g) {
          const std::uint32_t other = static_cast<std::uint32_t>(rng.next_below(threads));
          script.push_back({other, other == q ? SimAction::kProcessPending : SimAction::kUpdate});
        }
      }
      ++next_query;
    }
    const std::uint32_t j = static_cast<std::uint32_t>(rng.next_below(threads));
    script.push_back({j, rng.next_below(10) < 8 ? SimAction::kUpdate : SimAction::kProcessPending});
  }
  return script;
}

// Round-robin script: every thread takes `per_thread` update steps, with a
// process-pending sweep every `pending_every` rounds. Enough steps to absorb
// handover stalls are the caller's concern.
inline std::vector<SimOp> round_robin_script(std::uint32_t threads, std::uint64_t per_thread,
                                             std::uint64_t pending_every = 16) {
  std::vector<SimOp> script;
  script.reserve(per_thread * threads + (pending_every ? per_thread / pending_every * threads : 0) + threads);
  for (std::uint64_t r = 0; r < per_thread; ++r) {
    for (std::uint32_t j = 0; j < threads; ++j) script.push_back({j, SimAction::kUpdate});
    if (pending_every != 0 && r % pending_every == pending_every - 1)
      for (std::uint32_t j = 0; j < threads; ++j) script.push_back({j, SimAction::kProcessPending});
  }
  return script;
}

}  // namespace freq
