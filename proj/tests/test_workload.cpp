#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "freq/workload.hpp"

using namespace freq;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("freq_test_" + name);
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("zipf generation is deterministic per spec") {
  StreamSpec spec{{1.25, 1000}, 5000, 99, false};
  auto a = ZipfGenerator(spec).all();
  auto b = ZipfGenerator(spec).all();
  CHECK(a == b);

  spec.seed = 100;
  CHECK(ZipfGenerator(spec).all() != a);
}

TEST_CASE("zipf parameter validation") {
  CHECK_THROWS_AS(ZipfGenerator({{0.0, 100}, 10, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ZipfGenerator({{1.0, 0}, 10, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ZipfGenerator({{1.0, 1 << 20}, 10, 1}, 1 << 10), std::invalid_argument);
}

TEST_CASE("extreme skew concentrates on rank one") {
  ZipfGenerator gen({{50.0, 100}, 100000, 3});
  std::uint64_t rank_one = 0;
  for (std::uint64_t i = 0; i < gen.length(); ++i)
    if (gen.next() == 1) ++rank_one;
  CHECK(static_cast<double>(rank_one) / 100000.0 >= 0.99);
}

TEST_CASE("low skew matches the analytic rank-one share") {
  const double a = 0.5;
  const std::uint64_t universe = 100;
  const std::uint64_t n = 1'000'000;
  double h = 0.0;
  for (std::uint64_t i = 1; i <= universe; ++i) h += std::pow(static_cast<double>(i), -a);
  const double p = 1.0 / h;

  ZipfGenerator gen({{a, universe}, n, 17});
  std::uint64_t rank_one = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (gen.next() == 1) ++rank_one;

  const double share = static_cast<double>(rank_one) / static_cast<double>(n);
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  CHECK(std::abs(share - p) < 3.0 * sigma);
}

TEST_CASE("rank shuffle permutes ids but not the frequency profile") {
  StreamSpec plain{{1.5, 64}, 20000, 5, false};
  StreamSpec shuffled = plain;
  shuffled.rank_shuffle = true;

  std::map<ElementId, std::uint64_t> freq_plain, freq_shuffled;
  for (ElementId e : ZipfGenerator(plain).all()) ++freq_plain[e];
  for (ElementId e : ZipfGenerator(shuffled).all()) {
    CHECK(e >= 1);
    CHECK(e <= 64);
    ++freq_shuffled[e];
  }

  std::vector<std::uint64_t> counts_plain, counts_shuffled;
  for (auto& [e, c] : freq_plain) counts_plain.push_back(c);
  for (auto& [e, c] : freq_shuffled) counts_shuffled.push_back(c);
  std::sort(counts_plain.begin(), counts_plain.end());
  std::sort(counts_shuffled.begin(), counts_shuffled.end());
  CHECK(counts_plain == counts_shuffled);

  CHECK(ZipfGenerator(shuffled).all() == ZipfGenerator(shuffled).all());
}

TEST_CASE("text stream parsing") {
  FileGuard g{temp_file("text_basic.txt")};
  {
    std::ofstream out(g.path);
    out << "7\n7\n9\n";
  }
  CHECK(read_stream(g.path.string(), StreamFormat::kText) == std::vector<ElementId>{7, 7, 9});
}

TEST_CASE("text stream rejects malformed input") {
  FileGuard g{temp_file("text_bad.txt")};
  {
    std::ofstream out(g.path);
    out << "7\nx2\n";
  }
  CHECK_THROWS_WITH(read_stream(g.path.string(), StreamFormat::kText),
                    Catch::Matchers::ContainsSubstring("line 2"));

  {
    std::ofstream out(g.path);
    out << "7\n\n9\n";
  }
  CHECK_THROWS_AS(read_stream(g.path.string(), StreamFormat::kText), StreamParseError);

  {
    std::ofstream out(g.path);
    out << "7\n9";  // missing trailing newline
  }
  CHECK_THROWS_AS(read_stream(g.path.string(), StreamFormat::kText), StreamParseError);

  {
    std::ofstream out(g.path);
    out << "99999999999999999999999\n";  // above 2^64 - 1
  }
  CHECK_THROWS_WITH(read_stream(g.path.string(), StreamFormat::kText),
                    Catch::Matchers::ContainsSubstring("out of range"));
}

TEST_CASE("binary stream round-trips exactly") {
  SplitMix64 rng(8);
  std::vector<std::vector<ElementId>> cases = {{}, {42}, {}};
  for (int i = 0; i < 10000; ++i) cases[2].push_back(rng.next());

  for (const auto& seq : cases) {
    FileGuard g{temp_file("bin_roundtrip.bin")};
    write_stream(g.path.string(), StreamFormat::kBinary, seq);
    CHECK(read_stream(g.path.string(), StreamFormat::kBinary) == seq);
  }
}

TEST_CASE("text stream round-trips exactly") {
  SplitMix64 rng(9);
  std::vector<ElementId> seq;
  for (int i = 0; i < 1000; ++i) seq.push_back(rng.next());
  FileGuard g{temp_file("text_roundtrip.txt")};
  write_stream(g.path.string(), StreamFormat::kText, seq);
  CHECK(read_stream(g.path.string(), StreamFormat::kText) == seq);
}

TEST_CASE("binary stream rejects bad magic and truncation") {
  FileGuard g{temp_file("bin_bad.bin")};
  {
    std::ofstream out(g.path, std::ios::binary);
    out << "NOTMAGIC";
  }
  CHECK_THROWS_WITH(read_stream(g.path.string(), StreamFormat::kBinary),
                    Catch::Matchers::ContainsSubstring("bad magic"));

  {
    std::ofstream out(g.path, std::ios::binary);
    out.write(kStreamMagic.data(), kStreamMagic.size());
    out << "abc";  // 3 stray bytes, not a full record
  }
  CHECK_THROWS_WITH(read_stream(g.path.string(), StreamFormat::kBinary),
                    Catch::Matchers::ContainsSubstring("offset 8"));
}
