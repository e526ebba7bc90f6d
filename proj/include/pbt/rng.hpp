#pragma once

#include <cstdint>
#include <initializer_list>

namespace pbt {

// Counter-based randomness. Every stochastic draw in a run is a pure function of
// (seed, stream, coordinates...), so paired runs share draws wherever their
// coordinates coincide and no generator state has to be threaded around.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream tags keep unrelated consumers of the same seed decorrelated.
enum class Stream : std::uint64_t {
  kBundleDraw = 0x0b,
  kRandomPolicy = 0x5e,
  kPool = 0xa1,
  kMarketParams = 0xc7,
};

constexpr std::uint64_t hash_key(std::uint64_t seed, Stream stream,
                                 std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by multiply-high; bias is below 2^-50 for bound < 2^14.
inline std::uint64_t to_index(std::uint64_t bits, std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * bound) >> 64);
}

/// A sequence of draws addressed by a fixed key and an incrementing counter.
class CounterStream {
public:
  explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next() noexcept { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
  constexpr double uniform() noexcept { return to_unit(next()); }
  std::uint64_t index(std::uint64_t bound) noexcept { return to_index(next(), bound); }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pbt
