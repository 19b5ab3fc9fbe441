#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "freq/metrics.hpp"
#include "freq/oracle.hpp"

using namespace freq;

TEST_CASE("accuracy on an exact report") {
  ExactCounts truth;
  for (ElementId e = 1; e <= 5; ++e) truth.add(e, 100);
  for (ElementId e = 6; e <= 30; ++e) truth.add(e, 2);

  std::vector<Counter> report;
  for (ElementId e = 1; e <= 5; ++e) report.push_back({e, 100});

  auto r = accuracy(report, truth, 0.1);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.are == 0.0);
}

TEST_CASE("accuracy arithmetic on a single overestimate") {
  ExactCounts truth;
  for (ElementId e = 1; e <= 10; ++e) truth.add(e, 100);

  std::vector<Counter> report;
  for (ElementId e = 1; e <= 9; ++e) report.push_back({e, 100});
  report.push_back({10, 110});

  auto r = accuracy(report, truth, 0.05);
  CHECK_THAT(r.are, Catch::Matchers::WithinAbs(0.01, 1e-12));
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
}

TEST_CASE("accuracy: missing one of four frequent elements") {
  ExactCounts truth;
  for (ElementId e = 1; e <= 4; ++e) truth.add(e, 50);
  for (ElementId e = 5; e <= 14; ++e) truth.add(e, 1);

  std::vector<Counter> report = {{1, 50}, {2, 50}, {3, 50}};
  CHECK(accuracy(report, truth, 0.1).recall == 0.75);
}

TEST_CASE("reported elements absent from the truth are excluded from ARE") {
  ExactCounts truth;
  truth.add(1, 100);
  std::vector<Counter> report = {{1, 100}, {999, 7}};
  auto r = accuracy(report, truth, 0.5);
  REQUIRE(r.unknown_reported == std::vector<ElementId>{999});
  CHECK(r.are == 0.0);         // the unknown element contributes no error term
  CHECK(r.precision == 0.5);   // but it does count against precision
}

TEST_CASE("accuracy requires a nonempty truth") {
  ExactCounts truth;
  CHECK_THROWS_AS(accuracy({}, truth, 0.1), std::invalid_argument);
}

TEST_CASE("ARE stays finite and nonnegative under stream duplication") {
  ExactCounts truth, doubled;
  for (ElementId e = 1; e <= 20; ++e) {
    truth.add(e, 10 + e);
    doubled.add(e, 2 * (10 + e));
  }
  std::vector<Counter> report, report2;
  for (ElementId e = 1; e <= 20; ++e) {
    report.push_back({e, 12 + e});
    report2.push_back({e, 2 * (12 + e)});
  }
  auto r1 = accuracy(report, truth, 0.01);
  auto r2 = accuracy(report2, doubled, 0.01);
  CHECK(r1.are >= 0.0);
  CHECK(r2.are >= 0.0);
  CHECK(std::isfinite(r1.are));
  CHECK(std::isfinite(r2.are));
}

TEST_CASE("perf recorder summaries") {
  PerfRecorder rec;
  rec.add_updates(1000);
  auto s = rec.summarize(0.5);
  CHECK(s.updates == 1000);
  CHECK(s.queries == 0);
  CHECK(s.mean_us == 0.0);
  CHECK_THAT(s.mops, Catch::Matchers::WithinRel(1000.0 / 0.5 / 1e6, 1e-9));

  PerfRecorder worker;
  for (int i = 1; i <= 100; ++i) worker.record_query_ns(1000.0 * i);  // 1..100 us
  rec.merge(worker);
  s = rec.summarize(0.5);
  CHECK(s.queries == 100);
  CHECK(rec.latencies_us().size() == 100);
  CHECK_THAT(s.mean_us, Catch::Matchers::WithinAbs(50.5, 1e-9));
  CHECK_THAT(s.p99_us, Catch::Matchers::WithinAbs(99.0, 1e-9));
}

TEST_CASE("memory model is reproducible from config alone") {
  EngineConfig cfg;
  cfg.epsilon = 1e-4;
  cfg.phi = 1e-3;
  cfg.threads = 1;
  cfg.filter_slots = 16;
  cfg.handover_bound = 1000;
  // 10000 counters pad to 16383
  CHECK(memory_model(cfg) == (16383ull + 16ull) * 32ull);

  EngineConfig zipf;
  zipf.epsilon = 1e-5;
  zipf.phi = 1e-4;
  zipf.threads = 24;
  zipf.filter_slots = 16;
  zipf.handover_bound = 1000;
  zipf.sizing = Sizing::kZipf;
  zipf.zipf_skew = 2.0;
  // 65 counters pad to 127
  CHECK(memory_model(zipf) == (24ull * 127ull + 24ull * 24ull * 16ull) * 32ull);

  EngineConfig bad = cfg;
  bad.filter_slots = 0;
  CHECK_THROWS_AS(memory_model(bad), std::invalid_argument);
}
