#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "freq/common.hpp"
#include "freq/engine.hpp"
#include "freq/oracle.hpp"

namespace freq {

struct AccuracyResult {
  double precision = 1.0;  // 1.0 when nothing was reported
  double recall = 1.0;     // 1.0 when nothing is truly frequent
  double are = 0.0;        // mean relative estimation error over the report
  std::uint64_t reported = 0;
  std::uint64_t true_frequent = 0;
  // Reported elements absent from the truth (f = 0). They count against
  // precision and are excluded from ARE; callers should log them.
  std::vector<ElementId> unknown_reported;
};

// Precision, recall and average relative error of a report against exact
// counts, with the frequent set taken as {e : f(e) > n * phi}.
inline AccuracyResult accuracy(std::span<const Counter> report, const ExactCounts& truth, double phi) {
  if (truth.n == 0) throw std::invalid_argument("accuracy: truth is empty");
  AccuracyResult out;
  const double n = static_cast<double>(truth.n);

  std::unordered_set<ElementId> reported;
  reported.reserve(report.size());
  double err_sum = 0.0;
  std::uint64_t err_terms = 0;
  std::uint64_t hits = 0;
  for (const Counter& c : report) {
    if (!reported.insert(c.element).second) continue;
    const Count f = truth.of(c.element);
    if (f == 0) {
      out.unknown_reported.push_back(c.element);
      continue;
    }
    const double fd = static_cast<double>(f);
    err_sum += std::abs(static_cast<double>(c.count) - fd) / fd;
    ++err_terms;
    if (fd > n * phi) ++hits;
  }

  std::uint64_t frequent = 0;
  std::uint64_t found = 0;
  for (const auto& [e, f] : truth.counts) {
    if (static_cast<double>(f) > n * phi) {
      ++frequent;
      if (reported.count(e)) ++found;
    }
  }

  out.reported = reported.size();
  out.true_frequent = frequent;
  out.precision = reported.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(reported.size());
  out.recall = frequent == 0 ? 1.0 : static_cast<double>(found) / static_cast<double>(frequent);
  out.are = err_terms == 0 ? 0.0 : err_sum / static_cast<double>(err_terms);
  return out;
}

// Per-thread operation and latency tallies; merge after the run.
class PerfRecorder {
 public:
  void add_updates(std::uint64_t n) noexcept { updates_ += n; }

  void record_query_ns(double ns) {
    ++queries_;
    latencies_us_.push_back(ns / 1000.0);
  }

  void merge(const PerfRecorder& other) {
    updates_ += other.updates_;
    queries_ += other.queries_;
    latencies_us_.insert(latencies_us_.end(), other.latencies_us_.begin(), other.latencies_us_.end());
  }

  struct Summary {
    std::uint64_t updates = 0;
    std::uint64_t queries = 0;
    double elapsed_s = 0.0;
    double mops = 0.0;     // updates + queries per microsecond
    double mean_us = 0.0;  // query latency
    double p99_us = 0.0;
  };

  Summary summarize(double elapsed_s) const {
    Summary s;
    s.updates = updates_;
    s.queries = queries_;
    s.elapsed_s = elapsed_s;
    if (elapsed_s > 0) s.mops = static_cast<double>(updates_ + queries_) / elapsed_s / 1e6;
    if (!latencies_us_.empty()) {
      std::vector<double> sorted = latencies_us_;
      std::sort(sorted.begin(), sorted.end());
      double sum = 0.0;
      for (double v : sorted) sum += v;
      s.mean_us = sum / static_cast<double>(sorted.size());
      const std::size_t idx = static_cast<std::size_t>(
          std::ceil(0.99 * static_cast<double>(sorted.size()))) - 1;
      s.p99_us = sorted[std::min(idx, sorted.size() - 1)];
    }
    return s;
  }

  const std::vector<double>& latencies_us() const noexcept { return latencies_us_; }

 private:
  std::uint64_t updates_ = 0;
  std::uint64_t queries_ = 0;
  std::vector<double> latencies_us_;
};

// Counter-count memory model at 32 bytes per counter: T synopses of m'
// (padded) counters plus the T^2 filters of D slots each. Reproducible from
// the config alone, no runtime measurement.
inline std::uint64_t memory_model(const EngineConfig& config) {
  config.validate();
  const std::uint64_t per_instance = padded_capacity(config.counters_per_thread());
  const std::uint64_t t = config.threads;
  return (t * per_instance + t * t * config.filter_slots) * 32ull;
}

}  // namespace freq
