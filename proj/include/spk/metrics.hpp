#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "spk/dataset.hpp"
#include "spk/dfa.hpp"
#include "spk/sampler.hpp"

namespace spk {

struct DatasetStats {
  std::map<std::size_t, std::uint64_t> per_length_counts;
  std::size_t max_ldd = 0;  // longest string; the LDD span bound
  std::size_t min_length = 0;
  std::map<char, double> symbol_frequency;  // relative, over all characters
  std::uint64_t total_characters = 0;
  std::uint64_t strings = 0;
  double distinct_ratio = 0;  // distinct strings / strings

  // Auxiliary: distance from the first symbol that starts matching some
  // forbidden string to the end of the string (0 if none does).
  std::size_t max_activation_span = 0;
  double mean_activation_span = 0;
};

// Positions from the first constraint-triggering symbol to the end of w.
inline std::size_t activation_span(const SpkGrammar& g, std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (const auto& f : g.forbidden())
      if (f.front() == w[i]) return w.size() - i;
  return 0;
}

inline DatasetStats dataset_stats(const DatasetBundle& b) {
  if (b.size() == 0) throw Error("dataset_stats: bundle is empty");
  DatasetStats s;
  std::map<char, std::uint64_t> symbols;
  std::set<std::string_view> distinct;
  std::uint64_t span_total = 0;
  s.min_length = static_cast<std::size_t>(-1);
  b.for_each_string([&](const SymbolString& w) {
    ++s.per_length_counts[w.size()];
    s.max_ldd = std::max(s.max_ldd, w.size());
    s.min_length = std::min(s.min_length, w.size());
    s.total_characters += w.size();
    ++s.strings;
    for (char c : w) ++symbols[c];
    distinct.insert(w);
    auto span = activation_span(b.grammar, w);
    s.max_activation_span = std::max(s.max_activation_span, span);
    span_total += span;
  });
  for (const auto& [c, n] : symbols)
    s.symbol_frequency[c] = static_cast<double>(n) / static_cast<double>(s.total_characters);
  s.distinct_ratio = static_cast<double>(distinct.size()) / static_cast<double>(s.strings);
  s.mean_activation_span = static_cast<double>(span_total) / static_cast<double>(s.strings);
  return s;
}

// Per-character entropy, in bits, of the uniform distribution over accepted
// strings of length l: log2(count(l)) / l.
inline double oracle_entropy(const CountTable& table, std::size_t l) {
  const BigInt& c = table.count(l);
  if (c == 0) throw EmptyLanguageError("no accepted string has length " + std::to_string(l));
  return l == 0 ? 0.0 : log2_big(c) / static_cast<double>(l);
}

inline double oracle_entropy(const Dfa& d, std::size_t l) { return oracle_entropy(CountTable(d, l), l); }

struct OracleReport {
  std::map<std::size_t, double> per_length_entropy;  // bits/char
  double mean_entropy = 0;                            // bits per predicted token
  double perplexity = 1;                              // 2^mean_entropy
  bool boundary_included = false;
  double length_entropy = 0;  // bits per string, counted only with the boundary
};

// Minimum achievable per-token cross-entropy for a corpus with the given
// per-length string counts, drawn uniformly at each length.
//
// Without the boundary (lengths observed, not predicted):
//   H = sum_l n_l log2 c_l / sum_l n_l l
// With the boundary (end-of-string predicted as one extra token per string):
//   H = (sum_l n_l log2 c_l + N * H(L)) / sum_l n_l (l + 1)
// where H(L) is the entropy of the empirical length distribution n_l / N.
inline OracleReport oracle_report(const CountTable& table, const std::map<std::size_t, std::uint64_t>& counts,
                                  bool include_boundary = false) {
  OracleReport r;
  r.boundary_included = include_boundary;
  double info = 0, tokens = 0, strings = 0;
  for (const auto& [l, n] : counts) {
    if (n == 0) continue;
    const BigInt& c = table.count(l);
    if (c == 0) throw EmptyLanguageError("corpus has strings of length " + std::to_string(l) + " but the language does not");
    r.per_length_entropy[l] = oracle_entropy(table, l);
    info += static_cast<double>(n) * log2_big(c);
    tokens += static_cast<double>(n) * static_cast<double>(l);
    strings += static_cast<double>(n);
  }
  if (strings == 0) throw Error("oracle_report: empty corpus");
  if (include_boundary) {
    for (const auto& [l, n] : counts) {
      if (n == 0) continue;
      double p = static_cast<double>(n) / strings;
      r.length_entropy -= p * std::log2(p);
    }
    info += strings * r.length_entropy;
    tokens += strings;
  }
  r.mean_entropy = tokens > 0 ? info / tokens : 0.0;
  r.perplexity = std::exp2(r.mean_entropy);
  return r;
}

inline std::map<std::size_t, std::uint64_t> length_histogram(std::span<const SymbolString> corpus) {
  std::map<std::size_t, std::uint64_t> h;
  for (const auto& w : corpus) ++h[w.size()];
  return h;
}

inline void require_same_grammar(const DatasetBundle& b, const Dfa& d) {
  auto fp = fingerprint(d);
  if (fp != b.metadata.grammar_fingerprint)
    throw DatasetError("grammar fingerprint mismatch: dataset has " + b.metadata.grammar_fingerprint +
                       ", automaton has " + fp);
}

// Oracle floor of a whole bundle (all three splits).
inline OracleReport oracle_perplexity(const DatasetBundle& b, const Dfa& d, bool include_boundary = false) {
  require_same_grammar(b, d);
  std::map<std::size_t, std::uint64_t> counts;
  std::size_t longest = 0;
  b.for_each_string([&](const SymbolString& w) {
    ++counts[w.size()];
    longest = std::max(longest, w.size());
  });
  return oracle_report(CountTable(d, longest, std::max(longest, kDefaultLengthCap)), counts, include_boundary);
}

// Bits assigned to w by the generating process itself, predicting symbol by
// symbol with P(s | q, r) = N(delta(q, s), r - 1) / N(q, r). The product
// telescopes, so the sum is exactly log2 count(|w|) for every accepted w.
inline double oracle_string_bits(const CountTable& table, std::string_view w) {
  const Dfa& d = table.dfa();
  StateId q = d.start();
  double bits = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t r = w.size() - i;
    const StateId t = d.next(q, d.alphabet().require_index(w[i]));
    const BigInt& after = table.at(t, r - 1);
    if (after == 0) throw ZeroProbabilityError("'" + std::string(w) + "' is not in the language");
    bits += log2_big(table.at(q, r)) - log2_big(after);
    q = t;
  }
  return bits;
}

}  // namespace spk
