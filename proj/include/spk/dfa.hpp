#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spk/alphabet.hpp"
#include "spk/error.hpp"
#include "spk/grammar.hpp"

namespace spk {

using StateId = std::uint32_t;

// A complete deterministic finite automaton. Transitions are stored densely,
// row per state, columns in alphabet order, so every (state, symbol) pair has
// exactly one successor. Rejecting continuations end in a sink state.
class Dfa {
public:
  Dfa() = default;

  Dfa(Alphabet alphabet, StateId start, std::vector<std::uint8_t> accepting, std::vector<StateId> transitions)
      : alphabet_(std::move(alphabet)),
        start_(start),
        accepting_(std::move(accepting)),
        next_(std::move(transitions)) {
    const auto n = accepting_.size();
    if (n == 0) throw Error("a DFA needs at least one state");
    if (start_ >= n) throw Error("DFA start state out of range");
    if (next_.size() != n * alphabet_.size()) throw Error("DFA transition table is not total");
    for (auto t : next_)
      if (t >= n) throw Error("DFA transition target out of range");
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_states() const noexcept { return accepting_.size(); }
  StateId start() const noexcept { return start_; }
  bool is_accepting(StateId q) const noexcept { return accepting_[q] != 0; }
  StateId next(StateId q, std::size_t symbol_index) const noexcept {
    return next_[static_cast<std::size_t>(q) * alphabet_.size() + symbol_index];
  }
  std::span<const StateId> row(StateId q) const noexcept {
    return {next_.data() + static_cast<std::size_t>(q) * alphabet_.size(), alphabet_.size()};
  }
  const std::vector<std::uint8_t>& accepting() const noexcept { return accepting_; }
  const std::vector<StateId>& transitions() const noexcept { return next_; }

  // State reached from `from` after reading w.
  StateId run(std::string_view w, StateId from) const {
    StateId q = from;
    for (char c : w) q = next(q, alphabet_.require_index(c));
    return q;
  }
  StateId run(std::string_view w) const { return run(w, start_); }

  friend bool operator==(const Dfa&, const Dfa&) = default;

private:
  Alphabet alphabet_;
  StateId start_ = 0;
  std::vector<std::uint8_t> accepting_;
  std::vector<StateId> next_;
};

inline bool accepts(const Dfa& d, std::string_view w) { return d.is_accepting(d.run(w)); }

// The |f|+1 state automaton rejecting exactly the strings that contain f as a
// subsequence. State i means the longest matched prefix of f has length i;
// state |f| is the rejecting sink.
inline Dfa build_avoider(std::string_view f, const Alphabet& alphabet) {
  if (f.empty()) throw Error("build_avoider: forbidden string must be non-empty");
  alphabet.require_string(f);
  const auto m = f.size();
  const auto s = alphabet.size();
  std::vector<std::uint8_t> accepting(m + 1, 1);
  accepting[m] = 0;
  std::vector<StateId> next((m + 1) * s);
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t a = 0; a < s; ++a)
      next[i * s + a] = static_cast<StateId>(i < m && alphabet.symbol(a) == f[i] ? i + 1 : i);
  return Dfa(alphabet, 0, std::move(accepting), std::move(next));
}

// Product automaton for L(d1) ∩ L(d2), restricted to pairs reachable from the
// start pair. States are numbered in breadth-first discovery order.
inline Dfa intersect(const Dfa& d1, const Dfa& d2) {
  if (!(d1.alphabet() == d2.alphabet())) throw Error("intersect: automata are over different alphabets");
  const auto s = d1.alphabet().size();
  const auto width = static_cast<std::uint64_t>(d2.num_states());
  std::map<std::uint64_t, StateId> index;
  std::deque<std::pair<StateId, StateId>> queue;
  std::vector<std::uint8_t> accepting;
  std::vector<StateId> next;

  auto intern = [&](StateId a, StateId b) {
    auto key = a * width + b;
    auto [it, inserted] = index.emplace(key, static_cast<StateId>(accepting.size()));
    if (inserted) {
      accepting.push_back(d1.is_accepting(a) && d2.is_accepting(b));
      queue.emplace_back(a, b);
    }
    return it->second;
  };

  intern(d1.start(), d2.start());
  for (std::size_t done = 0; !queue.empty(); ++done) {
    auto [a, b] = queue.front();
    queue.pop_front();
    next.resize((done + 1) * s);
    for (std::size_t c = 0; c < s; ++c) next[done * s + c] = intern(d1.next(a, c), d2.next(b, c));
  }
  return Dfa(d1.alphabet(), 0, std::move(accepting), std::move(next));
}

namespace detail {

// Renumbers the states reachable from `root` of the quotient given by
// `block_of` in breadth-first order, following symbols in alphabet order.
inline Dfa canonical_quotient(const Dfa& d, const std::vector<StateId>& block_of, StateId root) {
  const auto s = d.alphabet().size();
  constexpr StateId unset = static_cast<StateId>(-1);
  std::size_t blocks = 0;
  for (auto b : block_of) blocks = std::max<std::size_t>(blocks, b + 1);
  // representative original state of every block
  std::vector<StateId> rep(blocks, unset);
  for (StateId q = 0; q < block_of.size(); ++q)
    if (rep[block_of[q]] == unset) rep[block_of[q]] = q;

  std::vector<StateId> order(blocks, unset);
  std::vector<StateId> bfs{block_of[root]};
  order[block_of[root]] = 0;
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    auto q = rep[bfs[i]];
    for (std::size_t c = 0; c < s; ++c) {
      auto b = block_of[d.next(q, c)];
      if (order[b] == unset) {
        order[b] = static_cast<StateId>(bfs.size());
        bfs.push_back(b);
      }
    }
  }
  std::vector<std::uint8_t> accepting(bfs.size());
  std::vector<StateId> next(bfs.size() * s);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    auto q = rep[bfs[i]];
    accepting[i] = d.is_accepting(q);
    for (std::size_t c = 0; c < s; ++c) next[i * s + c] = order[block_of[d.next(q, c)]];
  }
  return Dfa(d.alphabet(), 0, std::move(accepting), std::move(next));
}

}  // namespace detail

// Drops states unreachable from the start. The sink, when reachable, stays.
inline Dfa trim(const Dfa& d) {
  std::vector<StateId> identity(d.num_states());
  for (StateId q = 0; q < identity.size(); ++q) identity[q] = q;
  return detail::canonical_quotient(d, identity, d.start());
}

// Hopcroft partition refinement followed by canonical renumbering
// (breadth-first from the start state, symbols in alphabet order). Two
// automata accept the same language iff their minimized forms compare equal.
inline Dfa minimize(const Dfa& input) {
  const Dfa d = trim(input);
  const auto n = d.num_states();
  const auto s = d.alphabet().size();

  // inverse transitions in CSR form: preds of (symbol c, target t)
  std::vector<std::size_t> offset(s * n + 1, 0);
  for (StateId q = 0; q < n; ++q)
    for (std::size_t c = 0; c < s; ++c) ++offset[c * n + d.next(q, c) + 1];
  for (std::size_t i = 1; i < offset.size(); ++i) offset[i] += offset[i - 1];
  std::vector<StateId> preds(offset.back());
  {
    auto fill = offset;
    for (StateId q = 0; q < n; ++q)
      for (std::size_t c = 0; c < s; ++c) preds[fill[c * n + d.next(q, c)]++] = q;
  }

  std::vector<std::vector<StateId>> blocks;
  std::vector<StateId> block_of(n);
  {
    std::vector<StateId> acc, rej;
    for (StateId q = 0; q < n; ++q) (d.is_accepting(q) ? acc : rej).push_back(q);
    for (auto* part : {&acc, &rej})
      if (!part->empty()) {
        for (auto q : *part) block_of[q] = static_cast<StateId>(blocks.size());
        blocks.push_back(std::move(*part));
      }
  }

  // worklist of splitters (block, symbol)
  std::deque<std::pair<StateId, std::size_t>> work;
  std::vector<std::vector<std::uint8_t>> queued;  // queued[block][symbol]
  queued.assign(blocks.size(), std::vector<std::uint8_t>(s, 0));
  auto enqueue = [&](StateId b, std::size_t c) {
    if (!queued[b][c]) {
      queued[b][c] = 1;
      work.emplace_back(b, c);
    }
  };
  if (blocks.size() == 2) {
    StateId smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
    for (std::size_t c = 0; c < s; ++c) enqueue(smaller, c);
  }

  std::vector<std::uint8_t> marked(n, 0);
  std::vector<std::size_t> hits(blocks.size(), 0);
  std::vector<StateId> touched, x;
  while (!work.empty()) {
    auto [a, c] = work.front();
    work.pop_front();
    queued[a][c] = 0;

    x.clear();
    for (auto t : blocks[a])
      for (auto i = offset[c * n + t]; i < offset[c * n + t + 1]; ++i) {
        auto q = preds[i];
        if (!marked[q]) {
          marked[q] = 1;
          x.push_back(q);
        }
      }
    touched.clear();
    hits.resize(blocks.size(), 0);
    for (auto q : x)
      if (hits[block_of[q]]++ == 0) touched.push_back(block_of[q]);

    for (auto y : touched) {
      if (hits[y] < blocks[y].size()) {
        std::vector<StateId> in, out;
        for (auto q : blocks[y]) (marked[q] ? in : out).push_back(q);
        // y keeps the larger half; the smaller half becomes a new block
        if (in.size() > out.size()) std::swap(in, out);
        auto fresh = static_cast<StateId>(blocks.size());
        for (auto q : in) block_of[q] = fresh;
        blocks[y] = std::move(out);
        blocks.push_back(std::move(in));
        queued.emplace_back(s, 0);
        hits.push_back(0);
        // whether or not (y, sym) is pending, queuing the smaller half suffices
        for (std::size_t sym = 0; sym < s; ++sym) enqueue(fresh, sym);
      }
      hits[y] = 0;
    }
    for (auto q : x) marked[q] = 0;
  }
  return detail::canonical_quotient(d, block_of, d.start());
}

// Minimal automaton for the grammar: the product of one avoider per forbidden
// string, minimized after every step.
inline Dfa compile(const SpkGrammar& g) {
  const auto& forbidden = g.forbidden();
  Dfa acc = minimize(build_avoider(forbidden.front(), g.alphabet()));
  for (std::size_t i = 1; i < forbidden.size(); ++i)
    acc = minimize(intersect(acc, build_avoider(forbidden[i], g.alphabet())));
  return acc;
}

// Line-oriented canonical text of an automaton; stable across platforms.
inline std::string canonical_text(const Dfa& d) {
  std::ostringstream out;
  out << "alphabet " << d.alphabet().symbols() << "\n";
  out << "states " << d.num_states() << "\nstart " << d.start() << "\n";
  for (StateId q = 0; q < d.num_states(); ++q) {
    out << q << (d.is_accepting(q) ? " +" : " -");
    for (auto t : d.row(q)) out << ' ' << t;
    out << "\n";
  }
  return out.str();
}

// 64-bit FNV-1a of the canonical text of the minimized automaton, so equal
// languages share a fingerprint.
inline std::string fingerprint(const Dfa& d) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_text(minimize(d))) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// Graphviz rendering. States are numbered from 0; the rejecting sink is drawn
// dashed.
inline std::string to_dot(const Dfa& d, std::string_view name = "spk") {
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __start [shape=point];\n  __start -> q" << d.start() << ";\n";
  for (StateId q = 0; q < d.num_states(); ++q) {
    bool sink = !d.is_accepting(q);
    for (auto t : d.row(q)) sink = sink && t == q;
    out << "  q" << q << " [label=\"" << q << "\"";
    if (d.is_accepting(q)) out << ", shape=doublecircle";
    if (sink) out << ", style=dashed";
    out << "];\n";
  }
  for (StateId q = 0; q < d.num_states(); ++q) {
    std::map<StateId, std::string> labels;
    for (std::size_t c = 0; c < d.alphabet().size(); ++c) {
      auto& l = labels[d.next(q, c)];
      if (!l.empty()) l += ',';
      l += d.alphabet().symbol(c);
    }
    for (const auto& [t, l] : labels) out << "  q" << q << " -> q" << t << " [label=\"" << l << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace spk
