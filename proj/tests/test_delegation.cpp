#include <catch2/catch_amalgamated.hpp>

#include <thread>
#include <vector>

#include "freq/delegation.hpp"
#include "test_support.hpp"

using namespace freq;

TEST_CASE("owner_of is total, stable and single-valued for T=1") {
  OwnerMap one(1, 42);
  for (ElementId e = 0; e < 1000; ++e) CHECK(one.owner_of(e) == 0);

  OwnerMap four(4, 7);
  const std::uint32_t first = four.owner_of(42);
  for (int i = 0; i < 10; ++i) CHECK(four.owner_of(42) == first);
  CHECK(first < 4);
}

TEST_CASE("owner_of splits uniform ids evenly") {
  const std::uint32_t t = 4;
  OwnerMap map(t, 1234);
  SplitMix64 rng(99);
  const std::uint64_t n = 1'000'000;
  std::vector<std::uint64_t> buckets(t, 0);
  for (std::uint64_t i = 0; i < n; ++i) ++buckets[map.owner_of(rng.next())];
  for (std::uint64_t b : buckets) {
    const double share = static_cast<double>(b) / static_cast<double>(n);
    CHECK(share > 0.25 - 0.01 * 0.25);
    CHECK(share < 0.25 + 0.01 * 0.25);
  }
}

TEST_CASE("filter insert counts and saturates") {
  DelegationFilter f(2);
  CHECK(f.insert(10));
  CHECK(f.distinct() == 1);
  CHECK(f.total() == 1);
  CHECK(f.count_of(10) == 1);

  for (int i = 0; i < 3; ++i) CHECK(f.insert(10));
  CHECK(f.count_of(10) == 4);
  CHECK(f.distinct() == 1);

  CHECK(f.insert(11));
  CHECK_FALSE(f.insert(12));  // both slots taken, filter untouched
  CHECK(f.distinct() == 2);
  CHECK(f.total() == 5);
  CHECK(f.count_of(12) == 0);
}

TEST_CASE("filter state transitions are enforced") {
  DelegationFilter f(4);
  CHECK_THROWS_AS(f.drain([](ElementId, Count) {}), std::logic_error);  // still open

  f.insert(1);
  f.hand_over();
  CHECK_THROWS_AS(f.insert(2), std::logic_error);

  std::vector<std::pair<ElementId, Count>> got;
  f.drain([&](ElementId e, Count w) { got.emplace_back(e, w); });
  CHECK(got == std::vector<std::pair<ElementId, Count>>{{1, 1}});
  CHECK(f.state() == FilterState::kEmpty);
  CHECK(f.distinct() == 0);
  CHECK(f.total() == 0);

  f.reopen();
  CHECK(f.insert(5));
  CHECK(f.distinct() == 1);
}

TEST_CASE("drained filters hand back every pair") {
  DelegationFilter f(4);
  for (int i = 0; i < 3; ++i) f.insert(7);
  f.insert(9);
  f.hand_over();
  std::vector<std::pair<ElementId, Count>> got;
  f.drain([&](ElementId e, Count w) { got.emplace_back(e, w); });
  CHECK(got == std::vector<std::pair<ElementId, Count>>{{7, 3}, {9, 1}});
}

TEST_CASE("should_handover") {
  CHECK(should_handover(8, 8, false));   // window reached E
  CHECK_FALSE(should_handover(7, 8, false));
  CHECK(should_handover(1, 8, true));    // a full filter forces the round
}

TEST_CASE("pending queue preserves push order and hands out each filter once") {
  DelegationFilter a(2), b(2), c(2);
  PendingQueue q;
  CHECK(q.empty());
  q.push(&a);
  q.push(&b);
  q.push(&c);
  CHECK_FALSE(q.empty());

  std::vector<DelegationFilter*> got;
  for (DelegationFilter* f = q.take_all(); f != nullptr;
       f = f->queue_next.load(std::memory_order_relaxed))
    got.push_back(f);
  CHECK(got == std::vector<DelegationFilter*>{&a, &b, &c});
  CHECK(q.empty());
  CHECK(q.take_all() == nullptr);
}

TEST_CASE("pending queue survives concurrent producers") {
  constexpr int kProducers = 4;
  constexpr int kPerProducer = 2000;
  std::vector<DelegationFilter> filters;
  filters.reserve(kProducers * kPerProducer);
  for (int i = 0; i < kProducers * kPerProducer; ++i) filters.emplace_back(1);

  PendingQueue q;
  std::vector<std::thread> producers;
  for (int p = 0; p < kProducers; ++p) {
    producers.emplace_back([&, p] {
      for (int i = 0; i < kPerProducer; ++i) q.push(&filters[p * kPerProducer + i]);
    });
  }
  std::size_t seen = 0;
  for (int spins = 0; spins < 1'000'000 && seen < filters.size(); ++spins) {
    for (DelegationFilter* f = q.take_all(); f != nullptr;
         f = f->queue_next.load(std::memory_order_relaxed))
      ++seen;
  }
  for (auto& t : producers) t.join();
  for (DelegationFilter* f = q.take_all(); f != nullptr;
       f = f->queue_next.load(std::memory_order_relaxed))
    ++seen;
  CHECK(seen == filters.size());
}

TEST_CASE("filter matrix bookkeeping") {
  FilterMatrix m(3, 4);
  CHECK(m.threads() == 3);
  CHECK(m.total_processed() == 0);

  m.record_processed(1);
  m.record_processed(1);
  m.record_processed(2);
  CHECK(m.processed(0) == 0);
  CHECK(m.processed(1) == 2);
  CHECK(m.total_processed() == 3);

  CHECK_FALSE(m.handover_in_flight(0));
  m.filter(2, 0).insert(77);
  m.filter(2, 0).hand_over();
  CHECK(m.handover_in_flight(0));
  CHECK_FALSE(m.handover_in_flight(1));
  m.filter(2, 0).drain([](ElementId, Count) {});
  CHECK_FALSE(m.handover_in_flight(0));
}
