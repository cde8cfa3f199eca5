#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spk/dfa.hpp"
#include "spk/error.hpp"
#include "spk/grammar.hpp"
#include "spk/parallel.hpp"
#include "spk/rng.hpp"
#include "spk/sampler.hpp"
#include "spk/version.hpp"

namespace spk {

inline constexpr std::uint64_t kDefaultQuotaCap = 1'000'000;

// Generation parameters for one length band.
struct DatasetSpec {
  SpkGrammar grammar;
  std::size_t min_len = 2;
  std::size_t max_len = 20;
  std::uint64_t per_length_quota = kDefaultQuotaCap;
  std::uint64_t max_bytes = 15'000'000;
  std::uint64_t seed = 0;
  std::array<double, 3> splits{0.6, 0.2, 0.2};
  std::size_t length_cap = kDefaultLengthCap;
  std::uint64_t quota_cap = kDefaultQuotaCap;
  std::size_t threads = 0;  // 0: hardware concurrency; output does not depend on it

  void validate() const {
    if (min_len < 1) throw Error("min length must be at least 1");
    if (min_len > max_len)
      throw Error("min length " + std::to_string(min_len) + " exceeds max length " + std::to_string(max_len));
    if (max_len > length_cap)
      throw CapacityError("max length " + std::to_string(max_len) + " exceeds the length cap of " +
                          std::to_string(length_cap));
    if (per_length_quota < 1) throw Error("per-length quota must be positive");
    if (per_length_quota > quota_cap)
      throw CapacityError("per-length quota " + std::to_string(per_length_quota) + " exceeds the cap of " +
                          std::to_string(quota_cap));
    if (max_bytes < 1) throw Error("byte cap must be positive");
    double sum = 0;
    for (double r : splits) {
      if (!(r >= 0) || !std::isfinite(r)) throw Error("split ratios must be non-negative");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
  }
};

enum class ReplacementMode { none, without, with };

inline const char* to_string(ReplacementMode m) noexcept {
  switch (m) {
    case ReplacementMode::without: return "without";
    case ReplacementMode::with: return "with";
    default: return "none";
  }
}

inline ReplacementMode replacement_mode_from(std::string_view s) {
  if (s == "without") return ReplacementMode::without;
  if (s == "with") return ReplacementMode::with;
  if (s == "none") return ReplacementMode::none;
  throw DatasetError("unknown replacement mode '" + std::string(s) + "'");
}

struct DatasetMetadata {
  std::string grammar_fingerprint;
  std::size_t k = 0;
  std::string alphabet;  // symbols in order
  std::vector<SymbolString> forbidden;
  std::size_t min_len = 0, max_len = 0;
  std::uint64_t per_length_quota = 0;
  std::uint64_t max_bytes = 0;
  std::uint64_t seed = 0;
  std::array<double, 3> splits{};
  std::map<std::size_t, std::uint64_t> per_length_counts;  // pool, before the byte cap
  std::map<std::size_t, ReplacementMode> replacement_modes;
  std::map<std::size_t, std::uint64_t> retained_per_length_counts;  // after the byte cap
  std::uint64_t pool_size = 0;
  std::uint64_t total_bytes = 0;  // serialized bytes of all three splits
  std::string toolkit_version = kToolkitVersion;

  friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

// Train/valid/test corpora of one band plus the metadata describing how they
// were drawn.
struct DatasetBundle {
  SpkGrammar grammar;
  DatasetMetadata metadata;
  std::vector<SymbolString> train, valid, test;

  std::size_t size() const noexcept { return train.size() + valid.size() + test.size(); }

  template <typename Fn>
  void for_each_string(Fn&& fn) const {
    for (const auto* split : {&train, &valid, &test})
      for (const auto& w : *split) fn(w);
  }

  friend bool operator==(const DatasetBundle& a, const DatasetBundle& b) {
    return a.grammar == b.grammar && a.metadata == b.metadata && a.train == b.train && a.valid == b.valid &&
           a.test == b.test;
  }
};

// Sizes of the three splits for n strings: cumulative rounding, so each split
// is within one string of ratio * n.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& r) {
  auto cut1 = static_cast<std::size_t>(std::llround(r[0] * static_cast<double>(n)));
  auto cut2 = static_cast<std::size_t>(std::llround((r[0] + r[1]) * static_cast<double>(n)));
  cut1 = std::min(cut1, n);
  cut2 = std::clamp(cut2, cut1, n);
  return {cut1, cut2 - cut1, n - cut2};
}

namespace detail {

inline constexpr std::uint64_t kStreamItem = 0x6974656dull;  // "item"

struct PoolEntry {
  std::uint32_t length;
  std::uint32_t index;
};

}  // namespace detail

// Builds one band:
//   1. per length l: n_l = min(quota, count(l)). When quota > count(l) / 2 the
//      whole slice is enumerated, shuffled and its first n_l strings kept
//      (without replacement); otherwise n_l uniform draws with replacement.
//   2. all (length, index) slots are pooled and shuffled with the master seed;
//   3. the shuffled pool is cut at the longest prefix whose serialized size
//      (string + LF) fits in max_bytes;
//   4. that prefix is split train/valid/test in order.
// Draw i of length l uses its own stream, derive_seed(derive_seed(seed,
// length-tag, l), item-tag, i); the shuffle uses derive_seed(seed,
// shuffle-tag, 0). Only strings surviving the cap are materialized, so the
// result is identical for any thread count.
inline DatasetBundle build_dataset(const DatasetSpec& spec, std::ostream* log = nullptr) {
  spec.validate();
  const Dfa dfa = compile(spec.grammar);
  const CountTable table(dfa, spec.max_len, spec.length_cap);

  const std::size_t lengths = spec.max_len - spec.min_len + 1;
  std::vector<std::uint64_t> quota(lengths, 0);
  std::vector<ReplacementMode> mode(lengths, ReplacementMode::none);
  std::vector<std::vector<SymbolString>> without(lengths);
  bool any = false;
  for (std::size_t i = 0; i < lengths; ++i) {
    const BigInt& available = table.count(spec.min_len + i);
    if (available == 0) continue;
    any = true;
    if (BigInt(spec.per_length_quota) * 2 > available) {
      mode[i] = ReplacementMode::without;
      quota[i] = std::min<std::uint64_t>(spec.per_length_quota, static_cast<std::uint64_t>(available));
    } else {
      mode[i] = ReplacementMode::with;
      quota[i] = spec.per_length_quota;
    }
  }
  if (!any)
    throw EmptyLanguageError("the language has no strings with length in [" + std::to_string(spec.min_len) + ", " +
                             std::to_string(spec.max_len) + "]");

  auto length_seed = [&](std::size_t l) { return derive_seed(spec.seed, kStreamPerLength, l); };

  // small slices: enumerate and shuffle with the length's stream
  parallel_for(lengths, spec.threads, [&](std::size_t i) {
    if (mode[i] != ReplacementMode::without) return;
    const std::size_t l = spec.min_len + i;
    auto all = enumerate_strings(table, l, static_cast<std::size_t>(2 * spec.per_length_quota));
    SeededRng rng(length_seed(l));
    shuffle(all, rng);
    all.resize(static_cast<std::size_t>(quota[i]));
    without[i] = std::move(all);
  });

  std::vector<detail::PoolEntry> pool;
  std::uint64_t pool_size = 0;
  for (auto q : quota) pool_size += q;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (std::size_t i = 0; i < lengths; ++i)
    for (std::uint64_t j = 0; j < quota[i]; ++j)
      pool.push_back({static_cast<std::uint32_t>(spec.min_len + i), static_cast<std::uint32_t>(j)});
  {
    SeededRng rng(derive_seed(spec.seed, kStreamShuffle, 0));
    shuffle(pool, rng);
  }
  if (log) *log << "pool: " << pool.size() << " strings over " << lengths << " lengths\n";

  std::size_t keep = 0;
  std::uint64_t bytes = 0;
  while (keep < pool.size() && bytes + pool[keep].length + 1 <= spec.max_bytes) bytes += pool[keep++].length + 1;
  if (keep == 0)
    throw Error("byte cap of " + std::to_string(spec.max_bytes) + " cannot hold a single string of length " +
                std::to_string(pool.front().length));
  pool.resize(keep);

  std::vector<SymbolString> strings(keep);
  parallel_for(keep, spec.threads, [&](std::size_t n) {
    const auto [l, j] = pool[n];
    const std::size_t i = l - spec.min_len;
    if (mode[i] == ReplacementMode::without) {
      strings[n] = without[i][j];
    } else {
      SeededRng rng(derive_seed(length_seed(l), detail::kStreamItem, j));
      strings[n] = sample_uniform(table, l, rng);
    }
  });
  if (log) *log << "kept: " << keep << " strings, " << bytes << " bytes\n";

  DatasetBundle b{spec.grammar, {}, {}, {}, {}};
  auto& m = b.metadata;
  m.grammar_fingerprint = fingerprint(dfa);
  m.k = spec.grammar.k();
  m.alphabet = spec.grammar.alphabet().symbols();
  m.forbidden = spec.grammar.forbidden();
  m.min_len = spec.min_len;
  m.max_len = spec.max_len;
  m.per_length_quota = spec.per_length_quota;
  m.max_bytes = spec.max_bytes;
  m.seed = spec.seed;
  m.splits = spec.splits;
  for (std::size_t i = 0; i < lengths; ++i) {
    m.per_length_counts[spec.min_len + i] = quota[i];
    m.replacement_modes[spec.min_len + i] = mode[i];
    m.retained_per_length_counts[spec.min_len + i] = 0;
  }
  for (const auto& e : pool) ++m.retained_per_length_counts[e.length];
  m.pool_size = pool_size;
  m.total_bytes = bytes;

  for (const auto& w : strings) {
    if (!accepts(dfa, w) || w.size() < spec.min_len || w.size() > spec.max_len)
      throw std::logic_error("generated string '" + w + "' violates the grammar or the band");
  }
  auto sizes = split_sizes(keep, spec.splits);
  auto first = std::make_move_iterator(strings.begin());
  b.train.assign(first, first + sizes[0]);
  b.valid.assign(first + sizes[0], first + sizes[0] + sizes[1]);
  b.test.assign(first + sizes[0] + sizes[1], std::make_move_iterator(strings.end()));
  return b;
}

inline constexpr std::array<const char*, 3> kSplitFiles{"train.txt", "valid.txt", "test.txt"};

struct ManifestEntry {
  std::filesystem::path path;
  std::uint64_t bytes;
};
using Manifest = std::vector<ManifestEntry>;

inline nlohmann::ordered_json metadata_to_json(const DatasetMetadata& m) {
  nlohmann::ordered_json j;
  j["grammar_fingerprint"] = m.grammar_fingerprint;
  j["k"] = m.k;
  j["alphabet"] = m.alphabet;
  j["forbidden"] = m.forbidden;
  j["min_len"] = m.min_len;
  j["max_len"] = m.max_len;
  j["per_length_quota"] = m.per_length_quota;
  j["max_bytes"] = m.max_bytes;
  j["seed"] = m.seed;
  j["splits"] = m.splits;
  auto counts = nlohmann::ordered_json::object();
  auto modes = nlohmann::ordered_json::object();
  auto retained = nlohmann::ordered_json::object();
  for (const auto& [l, n] : m.per_length_counts) counts[std::to_string(l)] = n;
  for (const auto& [l, r] : m.replacement_modes) modes[std::to_string(l)] = to_string(r);
  for (const auto& [l, n] : m.retained_per_length_counts) retained[std::to_string(l)] = n;
  j["per_length_counts"] = counts;
  j["replacement_modes"] = modes;
  j["toolkit_version"] = m.toolkit_version;
  j["retained_per_length_counts"] = retained;
  j["pool_size"] = m.pool_size;
  j["total_bytes"] = m.total_bytes;
  j["distribution"] = "uniform-at-length";
  j["byte_cap_rule"] = "prefix-of-shuffled-pool";
  return j;
}

inline DatasetMetadata metadata_from_json(const nlohmann::json& j) {
  DatasetMetadata m;
  try {
    m.grammar_fingerprint = j.at("grammar_fingerprint").get<std::string>();
    m.k = j.at("k").get<std::size_t>();
    m.alphabet = j.at("alphabet").get<std::string>();
    m.forbidden = j.at("forbidden").get<std::vector<std::string>>();
    m.min_len = j.at("min_len").get<std::size_t>();
    m.max_len = j.at("max_len").get<std::size_t>();
    m.per_length_quota = j.at("per_length_quota").get<std::uint64_t>();
    m.max_bytes = j.at("max_bytes").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.splits = j.at("splits").get<std::array<double, 3>>();
    auto length_key = [](const std::string& s) {
      std::size_t l = 0;
      auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), l);
      if (ec != std::errc{} || end != s.data() + s.size()) throw DatasetError("bad length key '" + s + "'");
      return l;
    };
    for (const auto& [key, v] : j.at("per_length_counts").items()) m.per_length_counts[length_key(key)] = v;
    for (const auto& [key, v] : j.at("replacement_modes").items())
      m.replacement_modes[length_key(key)] = replacement_mode_from(v.get<std::string>());
    if (j.contains("retained_per_length_counts"))
      for (const auto& [key, v] : j.at("retained_per_length_counts").items())
        m.retained_per_length_counts[length_key(key)] = v;
    m.pool_size = j.value("pool_size", std::uint64_t{0});
    m.total_bytes = j.value("total_bytes", std::uint64_t{0});
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("meta.json: ") + e.what());
  }
  return m;
}

// Writes train.txt, valid.txt, test.txt (one string per line, LF) and
// meta.json into out_dir, creating it if needed.
inline Manifest serialize(const DatasetBundle& b, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());
  Manifest manifest;
  auto write = [&](const fs::path& p, auto&& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write failed for " + p.string());
    manifest.push_back({p, static_cast<std::uint64_t>(fs::file_size(p))});
  };
  const std::array<const std::vector<SymbolString>*, 3> splits{&b.train, &b.valid, &b.test};
  for (std::size_t s = 0; s < 3; ++s)
    write(out_dir / kSplitFiles[s], [&](std::ofstream& out) {
      for (const auto& w : *splits[s]) {
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
        out.put('\n');
      }
    });
  write(out_dir / "meta.json", [&](std::ofstream& out) { out << metadata_to_json(b.metadata).dump(2) << "\n"; });
  return manifest;
}

struct LoadOptions {
  // Check every line against the grammar.
  bool strict = false;
};

inline DatasetBundle load_dataset(const std::filesystem::path& dir, LoadOptions options = {}) {
  namespace fs = std::filesystem;
  auto read_file = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  nlohmann::json meta_json;
  const auto meta_path = dir / "meta.json";
  try {
    meta_json = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DatasetError(meta_path.string() + ": " + e.what());
  }
  DatasetMetadata meta = metadata_from_json(meta_json);

  SpkGrammar grammar = [&] {
    try {
      return SpkGrammar::from_forbidden(Alphabet(meta.alphabet), meta.k, meta.forbidden);
    } catch (const Error& e) {
      throw DatasetError(meta_path.string() + ": invalid grammar: " + e.what());
    }
  }();
  const Dfa dfa = compile(grammar);
  if (fingerprint(dfa) != meta.grammar_fingerprint)
    throw DatasetError(meta_path.string() + ": grammar fingerprint " + meta.grammar_fingerprint +
                       " does not match the recorded grammar (" + fingerprint(dfa) + ")");

  DatasetBundle b{grammar, meta, {}, {}, {}};
  const std::array<std::vector<SymbolString>*, 3> splits{&b.train, &b.valid, &b.test};
  for (std::size_t s = 0; s < 3; ++s) {
    const auto path = dir / kSplitFiles[s];
    const std::string text = read_file(path);
    if (!text.empty() && text.back() != '\n') throw DatasetError(path.string() + ": missing final newline");
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      SymbolString w = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line;
      if (options.strict) {
        if (!grammar.alphabet().covers(w))
          throw DatasetError(path.string() + " line " + std::to_string(line) + ": '" + w +
                             "' uses a symbol outside the alphabet");
        if (!accepts(dfa, w)) {
          auto witness = find_forbidden_subsequence(grammar.forbidden(), w);
          throw DatasetError(path.string() + " line " + std::to_string(line) + ": '" + w +
                             "' is not in the language (forbidden subsequence: " + witness.value_or("?") + ")");
        }
      }
      splits[s]->push_back(std::move(w));
    }
  }
  return b;
}

// "15MB", "150KB", "2MiB", "1000". K/M/G are decimal (10^3 steps), Ki/Mi/Gi
// binary; a trailing B is optional and case is ignored.
inline std::uint64_t parse_byte_size(std::string_view text) {
  auto bad = [&] { return Error("invalid size '" + std::string(text) + "'"); };
  std::size_t i = 0;
  while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
  if (i == 0) throw bad();
  double number = 0;
  {
    std::string digits(text.substr(0, i));
    std::size_t used = 0;
    try {
      number = std::stod(digits, &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != digits.size()) throw bad();
  }
  std::string unit;
  for (char c : text.substr(i))
    if (c != ' ') unit += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!unit.empty() && unit.back() == 'B') unit.pop_back();
  static const std::map<std::string, double> scale{{"", 1.0},
                                                   {"K", 1e3},
                                                   {"M", 1e6},
                                                   {"G", 1e9},
                                                   {"KI", 1024.0},
                                                   {"MI", 1024.0 * 1024},
                                                   {"GI", 1024.0 * 1024 * 1024}};
  auto it = scale.find(unit);
  if (it == scale.end()) throw bad();
  const double value = number * it->second;
  if (value < 1 || value > 1.8e19 || value != std::floor(value)) throw bad();
  return static_cast<std::uint64_t>(value);
}

}  // namespace spk
