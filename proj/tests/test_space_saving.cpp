#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "freq/oracle.hpp"
#include "freq/space_saving.hpp"
#include "test_support.hpp"

using namespace freq;
using namespace freqtest;

namespace {

std::vector<Counter> live_counters(const SpaceSaving& s) {
  std::vector<Counter> out;
  for (const Counter& c : s.heap().slots())
    if (c.element != kNoElement) out.push_back(c);
  return sorted_by_element(std::move(out));
}

}  // namespace

TEST_CASE("capacity follows epsilon unless overridden") {
  CHECK(SpaceSaving(0.0001).requested_counters() == 10000);
  CHECK(SpaceSaving(0.5).requested_counters() == 2);
  CHECK(SpaceSaving(1e-5, 65).requested_counters() == 65);
  CHECK(SpaceSaving(0.5).capacity() == 3);  // padded
  CHECK_THROWS_AS(SpaceSaving(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SpaceSaving(1.5), std::invalid_argument);
}

TEST_CASE("update walkthrough fills slots before evicting") {
  // Capacity 2 pads to 3 usable counters; the reference oracle run at the
  // padded capacity fixes the expected states.
  SpaceSaving s(0.5);
  ReferenceSpaceSaving ref(s.capacity());
  const ElementId x = 1, y = 2, z = 3;

  for (ElementId e : {x, x}) {
    s.update(e);
    ref.update(e);
  }
  CHECK(live_counters(s) == std::vector<Counter>{{x, 2}});

  s.update(y);
  ref.update(y);
  CHECK(live_counters(s) == std::vector<Counter>{{x, 2}, {y, 1}});
  CHECK(s.min_count() == 0);  // one slot still unoccupied

  s.update(z);
  ref.update(z);
  CHECK(live_counters(s) == std::vector<Counter>{{x, 2}, {y, 1}, {z, 1}});
  CHECK(s.min_count() == 1);
  CHECK(live_counters(s) == sorted_by_element(ref.counters()));
  CHECK(s.total_weight() == 4);
}

TEST_CASE("weighted update on an empty synopsis") {
  SpaceSaving s(0.5);
  s.update(1, 5);
  CHECK(live_counters(s) == std::vector<Counter>{{1, 5}});
  CHECK(s.total_weight() == 5);
}

TEST_CASE("single counter inherits the evicted count") {
  SpaceSaving s(1.0);  // one counter, pads to one slot
  REQUIRE(s.capacity() == 1);
  s.update(1);
  s.update(2);
  s.update(1);
  CHECK(live_counters(s) == std::vector<Counter>{{1, 3}});
  // true count of element 1 is 2; the overshoot is bounded by min_count
  CHECK(s.min_count() == 3);
}

TEST_CASE("query returns estimates strictly above the threshold") {
  SpaceSaving s(0.5);
  for (ElementId e : {1, 1, 2, 3}) s.update(e);
  auto got = sorted_by_element(s.query(1));
  CHECK(got == std::vector<Counter>{{1, 2}});
  CHECK(s.query(s.total_weight()).empty());
  CHECK(s.query(0).size() == 3);
}

TEST_CASE("min_count walkthrough") {
  SpaceSaving s(0.5);
  CHECK(s.min_count() == 0);
  for (ElementId e : {1, 1, 2}) s.update(e);
  CHECK(s.min_count() == 0);  // a padded slot is still unoccupied
  s.update(3);
  CHECK(s.min_count() == 1);
  s.update(4);
  CHECK(s.min_count() == 1);  // (4) inherited one count-1 slot, one remains
  s.update(5);
  CHECK(s.min_count() == 2);
}

TEST_CASE("property: conservation, overestimation and coverage on random streams") {
  SplitMix64 seeds(11);
  for (int round = 0; round < 60; ++round) {
    SplitMix64 rng(seeds.next());
    const std::uint32_t m = 4 + static_cast<std::uint32_t>(rng.next_below(61));
    const std::uint64_t n = 200 + rng.next_below(2000);
    const std::uint64_t universe = 1 + rng.next_below(200);

    SpaceSaving s(1e-3, m);
    ReferenceSpaceSaving ref(s.capacity());
    ExactCounts truth;
    for (std::uint64_t i = 0; i < n; ++i) {
      const ElementId e = 1 + rng.next_below(universe);
      s.update(e);
      ref.update(e);
      truth.add(e);
    }

    // conservation
    std::uint64_t tracked_weight = 0;
    for (const Counter& c : live_counters(s)) tracked_weight += c.count;
    REQUIRE(tracked_weight == n);
    REQUIRE(s.total_weight() == n);

    // equivalence with the independent array implementation
    REQUIRE(live_counters(s) == sorted_by_element(ref.counters()));

    // overestimation within F_min, coverage of everything above F_min
    const Count fmin = s.min_count();
    for (const Counter& c : live_counters(s)) {
      const Count f = truth.of(c.element);
      REQUIRE(c.count >= f);
      REQUIRE(c.count - f <= fmin);
    }
    for (const auto& [e, f] : truth.counts)
      if (f > fmin) REQUIRE(s.estimate_of(e).has_value());
  }
}

TEST_CASE("property: guarantees hold for every permutation of a stream") {
  SplitMix64 rng(99);
  std::vector<ElementId> stream;
  for (std::uint64_t i = 0; i < 400; ++i) stream.push_back(1 + rng.next_below(40));
  ExactCounts truth = exact_count(stream);

  for (int perm = 0; perm < 20; ++perm) {
    for (std::size_t i = stream.size() - 1; i > 0; --i)
      std::swap(stream[i], stream[rng.next_below(i + 1)]);

    SpaceSaving s(1e-3, 16);
    for (ElementId e : stream) s.update(e);

    std::uint64_t tracked_weight = 0;
    for (const Counter& c : live_counters(s)) tracked_weight += c.count;
    REQUIRE(tracked_weight == stream.size());
    const Count fmin = s.min_count();
    for (const Counter& c : live_counters(s)) {
      REQUIRE(c.count >= truth.of(c.element));
      REQUIRE(c.count - truth.of(c.element) <= fmin);
    }
    for (const auto& [e, f] : truth.counts)
      if (f > fmin) REQUIRE(s.estimate_of(e).has_value());
  }
}

TEST_CASE("F_min stays within floor(N*epsilon) when m >= 1/epsilon") {
  const double epsilon = 0.02;  // 50 counters
  SpaceSaving s(epsilon);
  SplitMix64 rng(5);
  std::uint64_t n = 0;
  for (int i = 0; i < 5000; ++i) {
    s.update(1 + rng.next_below(500));
    ++n;
    REQUIRE(s.min_count() <= static_cast<Count>(static_cast<double>(n) * epsilon));
  }
}
