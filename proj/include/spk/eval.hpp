#pragma once

#include <cstddef>

#include "spk/dataset.hpp"
#include "spk/metrics.hpp"
#include "spk/ngram.hpp"

namespace spk {

struct EvalReport {
  std::size_t order = 0;
  double alpha = 0;
  bool boundary_predicted = true;
  double train_perplexity = 0, valid_perplexity = 0, test_perplexity = 0;
  double test_cross_entropy = 0;  // bits per predicted token
  OracleReport oracle;            // floor for the test split, same boundary mode
  // Bits per token by which the model trails the generating process on the
  // test split; positive when the model misses constraints spanning more than
  // its context.
  double ldd_deficit = 0;
};

// Trains an n-gram model on the train split and scores every split. Empty
// splits report perplexity 1 (no predicted tokens).
inline EvalReport evaluate_bundle(const DatasetBundle& b, std::size_t order, double alpha = kDefaultAlpha,
                                  bool predict_boundary = true) {
  if (b.test.empty()) throw Error("evaluate: test split is empty");
  const Dfa dfa = compile(b.grammar);
  require_same_grammar(b, dfa);
  auto model = train_ngram(b.train, b.grammar.alphabet(), order, alpha, predict_boundary);

  EvalReport r;
  r.order = order;
  r.alpha = alpha;
  r.boundary_predicted = predict_boundary;
  r.train_perplexity = model.score(b.train).perplexity();
  r.valid_perplexity = model.score(b.valid).perplexity();
  auto test = model.score(b.test);
  r.test_perplexity = test.perplexity();
  r.test_cross_entropy = test.cross_entropy();

  std::size_t longest = 0;
  for (const auto& w : b.test) longest = std::max(longest, w.size());
  CountTable table(dfa, longest, std::max(longest, kDefaultLengthCap));
  r.oracle = oracle_report(table, length_histogram(b.test), predict_boundary);
  r.ldd_deficit = r.test_cross_entropy - r.oracle.mean_entropy;
  return r;
}

}  // namespace spk
