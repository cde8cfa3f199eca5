#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace spk {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64. Every draw below is defined in
// terms of next() alone, so a seed yields the same stream on every platform
// and standard library.
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, n), n > 0, by rejection of the biased low range.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      auto r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform on [0, n), n > 0, for arbitrary-precision n: draw msb(n)+1
  // random bits, most significant word first, and reject values >= n.
  BigInt below(const BigInt& n) {
    if (n <= std::numeric_limits<std::uint64_t>::max()) return BigInt(below(static_cast<std::uint64_t>(n)));
    const std::size_t bits = boost::multiprecision::msb(n) + 1;
    const std::size_t words = (bits + 63) / 64;
    const std::size_t top_bits = bits - (words - 1) * 64;
    const std::uint64_t top_mask = top_bits == 64 ? ~0ull : ((1ull << top_bits) - 1);
    while (true) {
      BigInt r = next() & top_mask;
      for (std::size_t i = 1; i < words; ++i) {
        r <<= 64;
        r |= next();
      }
      if (r < n) return r;
    }
  }

  double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::uint64_t s_[4]{};
};

// Seed of an independent stream: the master seed mixed with a purpose tag and
// an index (for per-length sampling, the string length).
//   derive_seed(m, t, i) = splitmix64 applied to (m ^ splitmix64(t ^ splitmix64(i)))
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) noexcept {
  std::uint64_t a = index;
  std::uint64_t b = tag ^ splitmix64(a);
  std::uint64_t c = master ^ splitmix64(b);
  return splitmix64(c);
}

inline constexpr std::uint64_t kStreamPerLength = 0x6c656e677468ull;  // "length"
inline constexpr std::uint64_t kStreamShuffle = 0x73687566666cull;    // "shuffl"

// Fisher–Yates, last position first.
template <typename T>
void shuffle(std::vector<T>& xs, SeededRng& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i)));
    using std::swap;
    swap(xs[i - 1], xs[j]);
  }
}

}  // namespace spk
