#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spk/alphabet.hpp"
#include "spk/error.hpp"

namespace spk {

inline constexpr std::size_t kMaxNgramOrder = 8;
inline constexpr double kDefaultAlpha = 0.01;

// Token used for string boundaries in n-gram contexts. Alphabet symbols are
// printable, so it never collides with one.
inline constexpr char kBoundary = '\n';

// Add-alpha smoothed character n-gram model. Every string is framed as
// (n-1) boundary tokens, its symbols, and one closing boundary token. When the
// boundary is predicted the vocabulary is the alphabet plus the boundary,
// otherwise the alphabet alone and the boundary only appears in contexts.
class NgramModel {
public:
  NgramModel(Alphabet alphabet, std::size_t order, double alpha, bool predict_boundary = true)
      : alphabet_(std::move(alphabet)), order_(order), alpha_(alpha), predict_boundary_(predict_boundary) {
    if (order_ < 1 || order_ > kMaxNgramOrder)
      throw Error("n-gram order must be in 1.." + std::to_string(kMaxNgramOrder));
    if (!(alpha_ >= 0) || !std::isfinite(alpha_)) throw Error("smoothing alpha must be a non-negative number");
  }

  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  bool predicts_boundary() const noexcept { return predict_boundary_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t vocabulary_size() const noexcept { return alphabet_.size() + (predict_boundary_ ? 1 : 0); }
  std::size_t contexts() const noexcept { return table_.size(); }

  void observe(std::string_view w) {
    alphabet_.require_string(w);
    for_each_event(w, [&](std::string_view ctx, std::size_t token) {
      auto& row = table_[std::string(ctx)];
      if (row.counts.empty()) row.counts.assign(vocabulary_size(), 0);
      ++row.counts[token];
      ++row.total;
    });
  }

  // P(token | context); token indexes the alphabet, alphabet.size() is the
  // boundary. Context is the last order-1 tokens as characters.
  double probability(std::string_view context, std::size_t token) const {
    const double v = static_cast<double>(vocabulary_size());
    auto it = table_.find(std::string(context));
    double c = 0, total = 0;
    if (it != table_.end()) {
      c = static_cast<double>(it->second.counts[token]);
      total = static_cast<double>(it->second.total);
    }
    const double denom = total + alpha_ * v;
    return denom == 0 ? 0.0 : (c + alpha_) / denom;
  }

  std::vector<double> distribution(std::string_view context) const {
    std::vector<double> p(vocabulary_size());
    for (std::size_t t = 0; t < p.size(); ++t) p[t] = probability(context, t);
    return p;
  }

  // Observed contexts, for normalization checks.
  std::vector<std::string> observed_contexts() const {
    std::vector<std::string> out;
    out.reserve(table_.size());
    for (const auto& [ctx, row] : table_) out.push_back(ctx);
    return out;
  }

  // Total bits and predicted token count over a corpus.
  struct Score {
    double bits = 0;
    std::uint64_t tokens = 0;
    double cross_entropy() const noexcept { return tokens ? bits / static_cast<double>(tokens) : 0.0; }
    double perplexity() const noexcept { return std::exp2(cross_entropy()); }
  };

  Score score(std::span<const SymbolString> corpus) const {
    Score s;
    for (const auto& w : corpus) {
      alphabet_.require_string(w);
      for_each_event(w, [&](std::string_view ctx, std::size_t token) {
        double p = probability(ctx, token);
        if (p <= 0) {
          std::string what = token < alphabet_.size() ? std::string(1, alphabet_.symbol(token)) : "<boundary>";
          throw ZeroProbabilityError("zero probability for " + what + " after context '" + printable(ctx) +
                                     "' in '" + w + "'");
        }
        s.bits -= std::log2(p);
        ++s.tokens;
      });
    }
    return s;
  }

private:
  struct Row {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  static std::string printable(std::string_view ctx) {
    std::string out;
    for (char c : ctx) out += c == kBoundary ? std::string("<s>") : std::string(1, c);
    return out;
  }

  template <typename Fn>
  void for_each_event(std::string_view w, Fn&& fn) const {
    std::string history(order_ - 1, kBoundary);
    auto push = [&](char c) {
      if (!history.empty()) {
        history.erase(0, 1);
        history.push_back(c);
      }
    };
    for (char c : w) {
      fn(std::string_view(history), alphabet_.index_of(c));
      push(c);
    }
    if (predict_boundary_) fn(std::string_view(history), alphabet_.size());
  }

  Alphabet alphabet_;
  std::size_t order_;
  double alpha_;
  bool predict_boundary_;
  std::unordered_map<std::string, Row> table_;
};

inline NgramModel train_ngram(std::span<const SymbolString> corpus, const Alphabet& alphabet, std::size_t order,
                              double alpha = kDefaultAlpha, bool predict_boundary = true) {
  if (corpus.empty()) throw Error("cannot train an n-gram model on an empty corpus");
  NgramModel m(alphabet, order, alpha, predict_boundary);
  for (const auto& w : corpus) m.observe(w);
  return m;
}

// 2^(cross-entropy in bits per predicted token).
inline double perplexity(const NgramModel& m, std::span<const SymbolString> corpus) {
  return m.score(corpus).perplexity();
}

}  // namespace spk
