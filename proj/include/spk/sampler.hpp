#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spk/dfa.hpp"
#include "spk/error.hpp"
#include "spk/rng.hpp"

namespace spk {

inline constexpr std::size_t kDefaultLengthCap = 500;

// log2 of a positive big integer, accurate to double precision.
inline double log2_big(const BigInt& n) {
  if (n <= 0) throw Error("log2_big: argument must be positive");
  const std::size_t msb = boost::multiprecision::msb(n);
  if (msb < 63) return std::log2(static_cast<double>(static_cast<std::uint64_t>(n)));
  const std::size_t shift = msb - 62;
  const auto top = static_cast<std::uint64_t>(n >> shift);
  return std::log2(static_cast<double>(top)) + static_cast<double>(shift);
}

// Exact number of accepted completions N(q, r) for every state q and every
// remaining length r <= max_length:
//   N(q, 0) = [q accepting]
//   N(q, r) = sum over symbols s of N(delta(q, s), r - 1)
class CountTable {
public:
  CountTable(Dfa dfa, std::size_t max_length, std::size_t length_cap = kDefaultLengthCap)
      : dfa_(std::move(dfa)), max_length_(max_length) {
    if (max_length > length_cap)
      throw CapacityError("length " + std::to_string(max_length) + " exceeds the configured cap of " +
                          std::to_string(length_cap));
    const auto n = dfa_.num_states();
    counts_.assign(max_length + 1, std::vector<BigInt>(n));
    for (StateId q = 0; q < n; ++q) counts_[0][q] = dfa_.is_accepting(q) ? 1 : 0;
    for (std::size_t r = 1; r <= max_length; ++r)
      for (StateId q = 0; q < n; ++q) {
        BigInt sum = 0;
        for (auto t : dfa_.row(q)) sum += counts_[r - 1][t];
        counts_[r][q] = std::move(sum);
      }
  }

  const Dfa& dfa() const noexcept { return dfa_; }
  std::size_t max_length() const noexcept { return max_length_; }

  const BigInt& at(StateId q, std::size_t remaining) const {
    require(remaining);
    return counts_[remaining][q];
  }

  // Accepted strings of length exactly l.
  const BigInt& count(std::size_t l) const { return at(dfa_.start(), l); }

  // Recomputes the recurrence from the stored table.
  bool verify() const {
    for (StateId q = 0; q < dfa_.num_states(); ++q)
      if (counts_[0][q] != (dfa_.is_accepting(q) ? 1 : 0)) return false;
    for (std::size_t r = 1; r <= max_length_; ++r)
      for (StateId q = 0; q < dfa_.num_states(); ++q) {
        BigInt sum = 0;
        for (auto t : dfa_.row(q)) sum += counts_[r - 1][t];
        if (sum != counts_[r][q]) return false;
      }
    return true;
  }

private:
  void require(std::size_t l) const {
    if (l > max_length_)
      throw CapacityError("length " + std::to_string(l) + " is beyond the table's maximum of " +
                          std::to_string(max_length_));
  }

  Dfa dfa_;
  std::size_t max_length_;
  std::vector<std::vector<BigInt>> counts_;  // [remaining][state]
};

inline BigInt count_strings(const Dfa& d, std::size_t l, std::size_t length_cap = kDefaultLengthCap) {
  return CountTable(d, l, length_cap).count(l);
}

// The string of length l with the given rank (0-based) in alphabet order
// among the accepted strings of length l.
inline SymbolString unrank(const CountTable& table, std::size_t l, BigInt rank) {
  const Dfa& d = table.dfa();
  if (rank < 0 || rank >= table.count(l)) throw Error("unrank: rank out of range");
  SymbolString out;
  out.reserve(l);
  StateId q = d.start();
  for (std::size_t r = l; r > 0; --r) {
    for (std::size_t c = 0; c < d.alphabet().size(); ++c) {
      auto t = d.next(q, c);
      const BigInt& n = table.at(t, r - 1);
      if (rank < n) {
        out.push_back(d.alphabet().symbol(c));
        q = t;
        break;
      }
      rank -= n;
    }
  }
  return out;
}

// Draws uniformly among accepted strings of length l. Equivalent to choosing
// symbol s in state q with r symbols left with probability
// N(delta(q,s), r-1) / N(q, r); implemented as unranking one uniform rank.
inline SymbolString sample_uniform(const CountTable& table, std::size_t l, SeededRng& rng) {
  const BigInt& total = table.count(l);
  if (total == 0) throw EmptyLanguageError("no accepted string has length " + std::to_string(l));
  return unrank(table, l, rng.below(total));
}

// All accepted strings of length l in alphabet-lexicographic order.
inline std::vector<SymbolString> enumerate_strings(const CountTable& table, std::size_t l, std::size_t limit) {
  if (limit == 0) throw Error("enumerate_strings: limit must be positive");
  const BigInt& total = table.count(l);
  if (total > limit)
    throw CapacityError(total.str() + " strings of length " + std::to_string(l) + " exceed the limit of " +
                        std::to_string(limit));
  const Dfa& d = table.dfa();
  std::vector<SymbolString> out;
  out.reserve(static_cast<std::size_t>(total));
  SymbolString cur;
  auto walk = [&](auto&& self, StateId q, std::size_t r) -> void {
    if (r == 0) {
      if (d.is_accepting(q)) out.push_back(cur);
      return;
    }
    for (std::size_t c = 0; c < d.alphabet().size(); ++c) {
      auto t = d.next(q, c);
      if (table.at(t, r - 1) == 0) continue;
      cur.push_back(d.alphabet().symbol(c));
      self(self, t, r - 1);
      cur.pop_back();
    }
  };
  walk(walk, d.start(), l);
  return out;
}

}  // namespace spk
