#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spk/error.hpp"

namespace spk {

// Strings over an alphabet are plain byte strings, one byte per symbol.
// The empty string is the empty std::string.
using SymbolString = std::string;

// An ordered set of single-character symbols. The order fixes the transition
// layout of every automaton built over it and the lexicographic order used by
// enumeration.
class Alphabet {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Alphabet() { index_.fill(-1); }

  explicit Alphabet(std::string_view symbols) {
    index_.fill(-1);
    if (symbols.empty()) throw AlphabetError("alphabet must not be empty");
    for (char c : symbols) {
      auto u = static_cast<unsigned char>(c);
      if (u < 0x21 || u > 0x7e)
        throw AlphabetError("alphabet symbol must be a printable, non-whitespace ASCII character (got byte " +
                            std::to_string(u) + ")");
      if (index_[u] >= 0) throw AlphabetError(std::string("duplicate alphabet symbol '") + c + "'");
      index_[u] = static_cast<std::int16_t>(symbols_.size());
      symbols_.push_back(c);
    }
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  char symbol(std::size_t i) const { return symbols_.at(i); }
  const std::string& symbols() const noexcept { return symbols_; }

  bool contains(char c) const noexcept { return index_[static_cast<unsigned char>(c)] >= 0; }

  std::size_t index_of(char c) const noexcept {
    auto i = index_[static_cast<unsigned char>(c)];
    return i < 0 ? npos : static_cast<std::size_t>(i);
  }

  // Index of c, or AlphabetError naming the symbol.
  std::size_t require_index(char c) const {
    auto i = index_of(c);
    if (i == npos) throw AlphabetError(std::string("symbol '") + c + "' is not in the alphabet {" + joined() + "}");
    return i;
  }

  void require_string(std::string_view w) const {
    for (char c : w) require_index(c);
  }

  bool covers(std::string_view w) const noexcept {
    for (char c : w)
      if (!contains(c)) return false;
    return true;
  }

  // "a,b,c,d"
  std::string joined(char sep = ',') const {
    std::string out;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (i) out += sep;
      out += symbols_[i];
    }
    return out;
  }

  // All strings of exactly length n, in lexicographic order of the alphabet.
  std::vector<SymbolString> strings_of_length(std::size_t n) const {
    std::vector<SymbolString> out;
    SymbolString cur(n, '\0');
    std::vector<std::size_t> digits(n, 0);
    if (symbols_.empty()) return out;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) cur[i] = symbols_[digits[i]];
      out.push_back(cur);
      std::size_t pos = n;
      while (pos > 0) {
        --pos;
        if (++digits[pos] < symbols_.size()) break;
        digits[pos] = 0;
        if (pos == 0) return out;
      }
      if (n == 0) return out;
    }
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) noexcept { return a.symbols_ == b.symbols_; }

private:
  std::string symbols_;
  std::array<std::int16_t, 256> index_{};
};

}  // namespace spk
