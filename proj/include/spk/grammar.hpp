#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "spk/alphabet.hpp"
#include "spk/error.hpp"
#include "spk/subseq.hpp"

namespace spk {

enum class SourceForm { forbidden_given, permitted_given };

inline const char* to_string(SourceForm f) noexcept {
  return f == SourceForm::forbidden_given ? "forbidden" : "permitted";
}

// Shortlex order over an alphabet: shorter strings first, then lexicographic
// by alphabet position.
struct ShortlexLess {
  const Alphabet* alphabet;
  bool operator()(std::string_view a, std::string_view b) const noexcept {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto x = alphabet->index_of(a[i]), y = alphabet->index_of(b[i]);
      if (x != y) return x < y;
    }
    return false;
  }
};

// Same as ShortlexLess without the length-first rule.
struct AlphabetLexLess {
  const Alphabet* alphabet;
  bool operator()(std::string_view a, std::string_view b) const noexcept {
    auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto x = alphabet->index_of(a[i]), y = alphabet->index_of(b[i]);
      if (x != y) return x < y;
    }
    return a.size() < b.size();
  }
};

// A Strictly k-Piecewise grammar held in forbidden-subsequence form.
//
// The forbidden set is kept as a subsequence antichain in shortlex order. A
// string belongs to the language iff none of the forbidden strings occurs in
// it as a subsequence; this applies to strings of every length, including
// those shorter than k.
class SpkGrammar {
public:
  static SpkGrammar from_forbidden(Alphabet alphabet, std::size_t k, std::vector<SymbolString> forbidden) {
    check_k(k);
    reject_duplicates(forbidden, "forbidden");
    for (const auto& f : forbidden) {
      if (f.empty()) throw Error("forbidden strings must be non-empty");
      if (f.size() > k)
        throw Error("forbidden string '" + f + "' is longer than k = " + std::to_string(k));
      alphabet.require_string(f);
    }
    SpkGrammar g(std::move(alphabet), k, normalize(std::move(forbidden)), SourceForm::forbidden_given);
    if (g.forbidden_.empty()) throw Error("an SPk grammar needs at least one forbidden string");
    return g;
  }

  // The forbidden set becomes the complement of `permitted` within the
  // length-k strings.
  static SpkGrammar from_permitted(Alphabet alphabet, std::size_t k, const std::vector<SymbolString>& permitted) {
    check_k(k);
    reject_duplicates(permitted, "permitted");
    std::unordered_set<SymbolString> allowed;
    for (const auto& p : permitted) {
      if (p.size() != k)
        throw Error("permitted string '" + p + "' must have length k = " + std::to_string(k));
      alphabet.require_string(p);
      allowed.insert(p);
    }
    std::vector<SymbolString> forbidden;
    for (auto& u : alphabet.strings_of_length(k))
      if (!allowed.contains(u)) forbidden.push_back(std::move(u));
    if (forbidden.empty())
      throw Error("every length-" + std::to_string(k) +
                  " string is permitted; the language is unconstrained and needs at least one forbidden string");
    return SpkGrammar(std::move(alphabet), k, normalize(std::move(forbidden)), SourceForm::permitted_given);
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t k() const noexcept { return k_; }
  const std::vector<SymbolString>& forbidden() const noexcept { return forbidden_; }
  SourceForm source_form() const noexcept { return source_form_; }

  friend bool operator==(const SpkGrammar& a, const SpkGrammar& b) noexcept {
    return a.alphabet_ == b.alphabet_ && a.k_ == b.k_ && a.forbidden_ == b.forbidden_;
  }

private:
  SpkGrammar(Alphabet alphabet, std::size_t k, std::vector<SymbolString> forbidden, SourceForm form)
      : alphabet_(std::move(alphabet)), k_(k), forbidden_(std::move(forbidden)), source_form_(form) {
    std::sort(forbidden_.begin(), forbidden_.end(), ShortlexLess{&alphabet_});
  }

  static void check_k(std::size_t k) {
    if (k < 1) throw Error("k must be a positive integer");
  }

  static void reject_duplicates(const std::vector<SymbolString>& xs, const char* what) {
    std::set<std::string_view> seen;
    for (const auto& x : xs)
      if (!seen.insert(x).second) throw Error(std::string("duplicate ") + what + " string '" + x + "'");
  }

  // Drops every member that has another member as a proper subsequence.
  static std::vector<SymbolString> normalize(std::vector<SymbolString> xs) {
    std::vector<SymbolString> out;
    for (const auto& x : xs) {
      bool redundant = std::any_of(xs.begin(), xs.end(), [&](const SymbolString& y) {
        return y.size() < x.size() && is_subsequence(y, x);
      });
      if (!redundant) out.push_back(x);
    }
    return out;
  }

  Alphabet alphabet_;
  std::size_t k_ = 0;
  std::vector<SymbolString> forbidden_;
  SourceForm source_form_ = SourceForm::forbidden_given;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view value, std::size_t line) {
  std::vector<std::string> items;
  value = trim(value);
  if (value.empty()) return items;
  std::size_t start = 0;
  while (true) {
    auto comma = value.find(',', start);
    auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (item.empty()) throw ParseError(line, "empty list entry");
    if (item.find_first_of(" \t") != std::string_view::npos)
      throw ParseError(line, "list entry '" + std::string(item) + "' contains whitespace");
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

}  // namespace detail

// Parses the line-oriented grammar format:
//
//   alphabet = a,b,c,d
//   k = 2
//   forbidden = ab,bc        # or: permitted = aa,ac,...
//
// `#` starts a comment. Keys may appear in any order, each at most once, and
// exactly one of `forbidden` / `permitted` must be present.
inline SpkGrammar parse_grammar(std::string_view text) {
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry, std::less<>> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto line = detail::trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(detail::trim(line.substr(0, eq)));
    if (key != "alphabet" && key != "k" && key != "forbidden" && key != "permitted")
      throw ParseError(line_no, "unknown key '" + key + "'");
    if (entries.contains(key)) throw ParseError(line_no, "key '" + key + "' given more than once");
    entries.emplace(key, Entry{std::string(detail::trim(line.substr(eq + 1))), line_no});
  }

  auto need = [&](const char* key) -> const Entry& {
    auto it = entries.find(key);
    if (it == entries.end()) throw ParseError(0, std::string("missing key '") + key + "'");
    return it->second;
  };

  const Entry& alpha_entry = need("alphabet");
  std::string symbols;
  for (const auto& item : detail::split_list(alpha_entry.value, alpha_entry.line)) {
    if (item.size() != 1)
      throw ParseError(alpha_entry.line, "alphabet symbols must be single characters (got '" + item + "')");
    symbols += item;
  }
  Alphabet alphabet;
  try {
    alphabet = Alphabet(symbols);
  } catch (const AlphabetError& e) {
    throw ParseError(alpha_entry.line, e.what());
  }

  const Entry& k_entry = need("k");
  long long k = 0;
  {
    const auto& v = k_entry.value;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
    if (ec != std::errc{} || end != v.data() + v.size())
      throw ParseError(k_entry.line, "k must be an integer (got '" + v + "')");
    if (k < 1) throw ParseError(k_entry.line, "k must be at least 1 (got " + v + ")");
  }

  bool has_f = entries.contains("forbidden"), has_p = entries.contains("permitted");
  if (has_f == has_p) throw ParseError(0, "exactly one of 'forbidden' or 'permitted' must be given");
  const Entry& list_entry = need(has_f ? "forbidden" : "permitted");
  auto items = detail::split_list(list_entry.value, list_entry.line);
  for (const auto& item : items)
    for (char c : item)
      if (!alphabet.contains(c))
        throw ParseError(list_entry.line, std::string("symbol '") + c + "' in '" + item + "' is not in the alphabet");
  try {
    if (has_f) return SpkGrammar::from_forbidden(alphabet, static_cast<std::size_t>(k), std::move(items));
    return SpkGrammar::from_permitted(alphabet, static_cast<std::size_t>(k), items);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(list_entry.line, e.what());
  }
}

// Canonical text of a grammar, always in forbidden form.
inline std::string format_grammar(const SpkGrammar& g) {
  std::ostringstream out;
  out << "alphabet = " << g.alphabet().joined() << "\n";
  out << "k = " << g.k() << "\n";
  out << "forbidden = ";
  for (std::size_t i = 0; i < g.forbidden().size(); ++i) out << (i ? "," : "") << g.forbidden()[i];
  out << "\n";
  return out.str();
}

// Length-k strings containing none of the forbidden strings, in alphabet order.
inline std::vector<SymbolString> permitted_set(const SpkGrammar& g) {
  std::vector<SymbolString> out;
  for (auto& u : g.alphabet().strings_of_length(g.k()))
    if (!find_forbidden_subsequence(g.forbidden(), u)) out.push_back(std::move(u));
  return out;
}

// Shortest forbidden subsequences implied by the grammar's length-k level.
//
// A non-empty v with |v| <= k is effectively forbidden when no permitted
// length-k string contains it. The result is the set of minimal such v. For
// strings w with |w| >= k it rejects exactly what the original forbidden set
// rejects; shorter strings may differ, so membership stays with the original
// set.
inline std::vector<SymbolString> minimal_forbidden(const SpkGrammar& g) {
  const auto k = g.k();
  std::unordered_set<SymbolString> covered;
  for (const auto& u : permitted_set(g))
    for (auto& s : subsequences_upto(u, k, k)) covered.insert(std::move(s));

  std::unordered_set<SymbolString> effective;
  for (std::size_t n = 1; n <= k; ++n)
    for (auto& v : g.alphabet().strings_of_length(n))
      if (!covered.contains(v)) effective.insert(std::move(v));

  // `effective` is upward closed within lengths <= k, so v is minimal iff no
  // single-symbol deletion of it is effective.
  std::vector<SymbolString> out;
  for (const auto& v : effective) {
    bool minimal = true;
    if (v.size() > 1) {
      for (std::size_t i = 0; i < v.size() && minimal; ++i) {
        SymbolString shorter = v;
        shorter.erase(i, 1);
        if (effective.contains(shorter)) minimal = false;
      }
    }
    if (minimal) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), ShortlexLess{&g.alphabet()});
  return out;
}

// Membership by direct scanning, independent of any automaton.
inline bool member_scan(const SpkGrammar& g, std::string_view w) {
  g.alphabet().require_string(w);
  return !find_forbidden_subsequence(g.forbidden(), w);
}

// A forbidden string occurring in w, if any.
inline std::optional<SymbolString> forbidden_witness(const SpkGrammar& g, std::string_view w) {
  g.alphabet().require_string(w);
  return find_forbidden_subsequence(g.forbidden(), w);
}

}  // namespace spk
