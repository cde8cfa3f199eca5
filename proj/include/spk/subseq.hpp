#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spk/alphabet.hpp"
#include "spk/error.hpp"

namespace spk {

// Default upper bound on k for subsequences_upto; the output grows like |w|^k.
inline constexpr std::size_t kDefaultSubseqCap = 6;

// True iff v can be obtained from w by deleting symbols. Greedy leftmost
// matching is exact for this relation, so the check is linear in |w|.
constexpr bool is_subsequence(std::string_view v, std::string_view w) noexcept {
  std::size_t i = 0;
  for (std::size_t j = 0; j < w.size() && i < v.size(); ++j)
    if (w[j] == v[i]) ++i;
  return i == v.size();
}

// Every distinct subsequence of w of length <= k, the empty string included.
// Built incrementally one symbol of w at a time with deduplication, so the
// cost is bounded by the size of the output, not by 2^|w|.
inline std::set<SymbolString> subsequences_upto(std::string_view w, std::size_t k,
                                                std::size_t cap = kDefaultSubseqCap) {
  if (k < 1) throw Error("subsequences_upto: k must be at least 1");
  if (k > cap)
    throw CapacityError("subsequences_upto: k = " + std::to_string(k) + " exceeds the cap of " + std::to_string(cap));
  std::set<SymbolString> out{SymbolString{}};
  std::vector<SymbolString> fresh;
  for (char c : w) {
    fresh.clear();
    for (const auto& s : out)
      if (s.size() < k) fresh.push_back(s + c);
    out.insert(fresh.begin(), fresh.end());
  }
  return out;
}

// First forbidden string (in the given order) occurring in w as a subsequence.
template <typename Range>
std::optional<SymbolString> find_forbidden_subsequence(const Range& forbidden, std::string_view w) {
  for (const auto& f : forbidden)
    if (is_subsequence(f, w)) return SymbolString(f);
  return std::nullopt;
}

}  // namespace spk
