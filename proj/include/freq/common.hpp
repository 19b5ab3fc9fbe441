#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <thread>

namespace freq {

using ElementId = std::uint64_t;
using Count = std::uint64_t;

// Reserved id marking an unoccupied counter slot. Never a valid stream element.
inline constexpr ElementId kNoElement = std::numeric_limits<ElementId>::max();

// An (element, estimated count) pair; the atom of every synopsis here.
struct Counter {
  ElementId element = kNoElement;
  Count count = 0;

  friend bool operator==(const Counter&, const Counter&) = default;
};

// Total order on counters: by count, then by element id. Distinct live
// counters never compare equivalent, so every structure respecting this
// order agrees on the minimum counter and on the eviction choice under
// count ties.
constexpr bool counter_less(const Counter& a, const Counter& b) noexcept {
  return a.count != b.count ? a.count < b.count : a.element < b.element;
}

// Smallest perfect-binary-tree size 2^k - 1 that holds `capacity` counters.
constexpr std::uint32_t padded_capacity(std::uint32_t capacity) noexcept {
  return static_cast<std::uint32_t>(std::bit_ceil(static_cast<std::uint64_t>(capacity) + 1) - 1);
}

// SplitMix64 (Steele, Lea, Flood). Seedable, portable, 64-bit output; every
// reproducible random choice in this project goes through it.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  constexpr double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound). Plain modulo; the bias is immaterial at the bound
  // sizes used here and keeps the sequence portable.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

// SplitMix64 finalizer as a standalone avalanche mix for hashing.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#else
  // fallback: nothing cheaper than a compiler barrier
  asm volatile("" ::: "memory");
#endif
}

// Spin briefly, then hand the core back; oversubscribed boxes stall badly
// on pure pause loops.
class Backoff {
 public:
  void wait() noexcept {
    if (++spins_ < 64)
      cpu_relax();
    else
      std::this_thread::yield();
  }

 private:
  unsigned spins_ = 0;
};

}  // namespace freq
