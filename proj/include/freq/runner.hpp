#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "freq/engine.hpp"

namespace freq {

struct RunOptions {
  // Updates between queries on each worker; 0 disables queries.
  std::uint64_t query_interval = 0;
  // Loop each worker's chunk until this many seconds elapse; 0 = single pass.
  double duration_s = 0.0;
  bool record_latency = false;
};

struct RunStats {
  std::uint64_t updates = 0;
  std::uint64_t queries = 0;
  double elapsed_s = 0.0;
  std::vector<double> query_us;  // per-query latency when recorded
};

// Drives the engine with real threads: the stream splits into T contiguous
// chunks, each worker feeds its chunk (optionally in a timed loop and with a
// query every query_interval updates), then hands over its leftovers and
// keeps draining its pending queue until every worker is done.
inline RunStats run_threaded(Engine& eng, std::span<const ElementId> stream, const RunOptions& opts) {
  using clock = std::chrono::steady_clock;
  const std::uint32_t t = eng.threads();
  const std::size_t chunk = (stream.size() + t - 1) / t;

  struct alignas(64) WorkerStats {
    std::uint64_t updates = 0;
    std::uint64_t queries = 0;
    std::vector<double> query_us;
  };
  std::vector<WorkerStats> per_worker(t);
  std::atomic<std::uint32_t> active{t};

  const auto start = clock::now();
  const auto deadline = start + std::chrono::duration_cast<clock::duration>(
                                    std::chrono::duration<double>(opts.duration_s));

  auto work = [&](std::uint32_t j) {
    WorkerStats& stats = per_worker[j];
    const std::size_t begin = std::min(static_cast<std::size_t>(j) * chunk, stream.size());
    const std::size_t end = std::min(begin + chunk, stream.size());
    std::uint64_t until_query = opts.query_interval;
    bool out_of_time = false;
    do {
      for (std::size_t k = begin; k < end; ++k) {
        eng.update(j, stream[k]);
        ++stats.updates;
        if (opts.query_interval != 0 && --until_query == 0) {
          until_query = opts.query_interval;
          if (opts.record_latency) {
            const auto q0 = clock::now();
            eng.query(j);
            stats.query_us.push_back(std::chrono::duration<double, std::micro>(clock::now() - q0).count());
          } else {
            eng.query(j);
          }
          ++stats.queries;
        }
        if (opts.duration_s > 0 && (stats.updates & 1023u) == 0 && clock::now() >= deadline) {
          out_of_time = true;
          break;
        }
      }
    } while (opts.duration_s > 0 && !out_of_time && clock::now() < deadline);

    eng.finish_worker(j);
    active.fetch_sub(1, std::memory_order_acq_rel);
    Backoff backoff;
    while (active.load(std::memory_order_acquire) != 0) {
      eng.process_pending(j);
      backoff.wait();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::uint32_t j = 0; j < t; ++j) pool.emplace_back(work, j);
  for (std::thread& th : pool) th.join();
  const double elapsed = std::chrono::duration<double>(clock::now() - start).count();

  RunStats out;
  out.elapsed_s = elapsed;
  for (WorkerStats& w : per_worker) {
    out.updates += w.updates;
    out.queries += w.queries;
    out.query_us.insert(out.query_us.end(), w.query_us.begin(), w.query_us.end());
  }
  return out;
}

}  // namespace freq
