#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "freq/common.hpp"

namespace freq {

struct ZipfParams {
  double skew = 1.0;        // a > 0
  std::uint64_t universe = 1;  // |U|
};

struct StreamSpec {
  ZipfParams zipf;
  std::uint64_t length = 1;
  std::uint64_t seed = 0;
  bool rank_shuffle = false;  // map ranks onto a seeded permutation of ids
};

// Finite-universe Zipf sampler: inverse-CDF over precomputed cumulative
// weights 1/i^a, binary-searched per sample, driven by SplitMix64. Identical
// specs produce identical sequences. Emitted ids are the 1-based ranks, or a
// seeded permutation of them under rank_shuffle.
class ZipfGenerator {
 public:
  // Universes above table_cap entries would need a cumulative table the size
  // of the universe; refuse rather than thrash.
  static constexpr std::uint64_t kDefaultTableCap = 1ull << 27;

  explicit ZipfGenerator(const StreamSpec& spec, std::uint64_t table_cap = kDefaultTableCap)
      : spec_(spec), rng_(spec.seed) {
    if (!(spec.zipf.skew > 0.0)) throw std::invalid_argument("ZipfGenerator: skew must be positive");
    if (spec.zipf.universe == 0) throw std::invalid_argument("ZipfGenerator: universe must be positive");
    if (spec.zipf.universe > table_cap)
      throw std::invalid_argument("ZipfGenerator: universe exceeds the cumulative-table cap");
    cdf_.resize(spec.zipf.universe);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < spec.zipf.universe; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -spec.zipf.skew);
      cdf_[i] = acc;
    }
    if (spec.rank_shuffle) {
      ids_.resize(spec.zipf.universe);
      for (std::uint64_t i = 0; i < spec.zipf.universe; ++i) ids_[i] = i + 1;
      SplitMix64 perm_rng(mix64(spec.seed) ^ 0x5eedf00dULL);
      for (std::uint64_t i = spec.zipf.universe - 1; i > 0; --i)
        std::swap(ids_[i], ids_[perm_rng.next_below(i + 1)]);
    }
  }

  const StreamSpec& spec() const noexcept { return spec_; }

  // Next sample; call length() times for the full stream.
  ElementId next() {
    const double u = rng_.next_unit() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::uint64_t rank = static_cast<std::uint64_t>(it - cdf_.begin());  // 0-based
    return ids_.empty() ? rank + 1 : ids_[rank];
  }

  std::uint64_t length() const noexcept { return spec_.length; }

  std::vector<ElementId> all() {
    std::vector<ElementId> out;
    out.reserve(spec_.length);
    for (std::uint64_t i = 0; i < spec_.length; ++i) out.push_back(next());
    return out;
  }

 private:
  StreamSpec spec_;
  SplitMix64 rng_;
  std::vector<double> cdf_;
  std::vector<ElementId> ids_;
};

enum class StreamFormat : std::uint8_t { kText, kBinary };

// Binary stream files start with this 8-byte magic, then consecutive 64-bit
// little-endian unsigned ids. Text files carry one unsigned decimal per
// LF-terminated line, no blank lines.
inline constexpr std::array<char, 8> kStreamMagic = {'Q', 'P', 'O', 'P', 'S', 'T', 'R', 'M'};

struct StreamParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class StreamWriter {
 public:
  StreamWriter(const std::string& path, StreamFormat format) : format_(format) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("StreamWriter: cannot open " + path);
    if (format_ == StreamFormat::kBinary) out_.write(kStreamMagic.data(), kStreamMagic.size());
  }

  void append(ElementId e) {
    if (format_ == StreamFormat::kText) {
      char buf[24];
      const int len = std::snprintf(buf, sizeof buf, "%llu\n", static_cast<unsigned long long>(e));
      out_.write(buf, len);
    } else {
      char buf[8];
      for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((e >> (8 * i)) & 0xff);
      out_.write(buf, 8);
    }
  }

  void close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("StreamWriter: write failed");
  }

 private:
  std::ofstream out_;
  StreamFormat format_;
};

// Streaming reader, constant memory. Malformed input throws StreamParseError
// naming the offending line (text) or byte offset (binary).
class StreamReader {
 public:
  StreamReader(const std::string& path, StreamFormat format) : path_(path), format_(format) {
    in_.open(path, std::ios::binary);
    if (!in_) throw std::runtime_error("StreamReader: cannot open " + path);
    if (format_ == StreamFormat::kBinary) {
      std::array<char, 8> magic{};
      in_.read(magic.data(), magic.size());
      if (in_.gcount() != 8 || magic != kStreamMagic)
        throw StreamParseError(path + ": bad magic at offset 0");
      offset_ = 8;
    }
  }

  std::optional<ElementId> next() {
    return format_ == StreamFormat::kText ? next_text() : next_binary();
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    while (auto e = next()) fn(*e);
  }

 private:
  std::optional<ElementId> next_text() {
    int c = in_.get();
    if (c == EOF) return std::nullopt;
    ++line_;
    ElementId value = 0;
    bool any = false;
    while (c != EOF && c != '\n') {
      if (c < '0' || c > '9')
        throw StreamParseError(path_ + ": non-numeric character on line " + std::to_string(line_));
      const ElementId digit = static_cast<ElementId>(c - '0');
      if (value > (kNoElement - digit) / 10)
        throw StreamParseError(path_ + ": value out of range on line " + std::to_string(line_));
      value = value * 10 + digit;
      any = true;
      c = in_.get();
    }
    if (!any)
      throw StreamParseError(path_ + ": blank line " + std::to_string(line_));
    if (c != '\n')
      throw StreamParseError(path_ + ": missing newline on line " + std::to_string(line_));
    return value;
  }

  std::optional<ElementId> next_binary() {
    std::array<char, 8> buf{};
    in_.read(buf.data(), buf.size());
    const std::streamsize got = in_.gcount();
    if (got == 0) return std::nullopt;
    if (got != 8)
      throw StreamParseError(path_ + ": truncated record at offset " + std::to_string(offset_));
    ElementId value = 0;
    for (int i = 7; i >= 0; --i) value = (value << 8) | static_cast<unsigned char>(buf[i]);
    offset_ += 8;
    return value;
  }

  std::string path_;
  StreamFormat format_;
  std::ifstream in_;
  std::uint64_t line_ = 0;
  std::uint64_t offset_ = 0;
};

inline void write_stream(const std::string& path, StreamFormat format, std::span<const ElementId> seq) {
  StreamWriter w(path, format);
  for (ElementId e : seq) w.append(e);
  w.close();
}

inline std::vector<ElementId> read_stream(const std::string& path, StreamFormat format) {
  StreamReader r(path, format);
  std::vector<ElementId> out;
  r.for_each([&](ElementId e) { out.push_back(e); });
  return out;
}

}  // namespace freq
