#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spk/dataset.hpp"
#include "spk/dfa.hpp"
#include "spk/eval.hpp"
#include "spk/grammar.hpp"
#include "spk/metrics.hpp"
#include "spk/sampler.hpp"
#include "spk/version.hpp"

namespace spk::cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

// Flag values known to be malformed after parsing (before any work).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline SpkGrammar load_grammar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read grammar file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_grammar(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

inline std::array<double, 3> parse_splits(const std::string& text) {
  std::array<double, 3> r{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 3) throw UsageError("--splits takes exactly three ratios");
    try {
      std::size_t used = 0;
      r[n] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--splits: '" + item + "' is not a number");
    }
    if (r[n] < 0) throw UsageError("--splits: ratios must be non-negative");
    ++n;
  }
  if (n != 3) throw UsageError("--splits takes exactly three ratios");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw UsageError("--splits: ratios must sum to 1");
  return r;
}

inline std::string fmt(double x, int digits = 6) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << x;
  return out.str();
}

// key=value lines for a flat JSON object (nested objects use dotted keys).
inline void print_flat(std::ostream& out, const nlohmann::ordered_json& j, const std::string& prefix = "") {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      print_flat(out, value, name);
    } else if (value.is_string()) {
      out << name << "=" << value.get<std::string>() << "\n";
    } else if (value.is_number_float()) {
      out << name << "=" << fmt(value.get<double>()) << "\n";
    } else {
      out << name << "=" << value.dump() << "\n";
    }
  }
}

inline nlohmann::ordered_json oracle_json(const OracleReport& r) {
  nlohmann::ordered_json j;
  j["boundary_included"] = r.boundary_included;
  j["mean_entropy_bits"] = r.mean_entropy;
  j["perplexity"] = r.perplexity;
  if (r.boundary_included) j["length_entropy_bits"] = r.length_entropy;
  auto per = nlohmann::ordered_json::object();
  for (const auto& [l, h] : r.per_length_entropy) per[std::to_string(l)] = h;
  j["per_length_entropy_bits"] = per;
  return j;
}

}  // namespace detail

// Entry point shared by the `spk` binary and the tests. args excludes the
// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spk: Strictly k-Piecewise grammars, automata and benchmark datasets", "spk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Progress messages on stderr (repeatable)");

  std::string grammar_path, data_dir, out_dir, word, max_bytes_text = "15MB", splits_text = "0.6,0.2,0.2";
  std::size_t length = 0, n = 1, min_len = 2, max_len = 20, order = 2, length_cap = kDefaultLengthCap,
              threads = 0;
  std::uint64_t seed = 0, per_length = kDefaultQuotaCap, quota_cap = kDefaultQuotaCap;
  double alpha = kDefaultAlpha;
  bool json = false, boundary = false, no_boundary = false, strict = false;

  auto add_grammar = [&](CLI::App* c) {
    c->add_option("--grammar", grammar_path, "Grammar file (alphabet / k / forbidden|permitted)")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto add_length_cap = [&](CLI::App* c) {
    c->add_option("--length-cap", length_cap, "Largest string length that may be counted")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "Decide membership of one string");
  add_grammar(check);
  check->add_option("--string", word, "String to classify")->required();

  auto* count = app.add_subcommand("count", "Exact number of accepted strings of one length");
  add_grammar(count);
  count->add_option("--length", length, "String length")->required();
  add_length_cap(count);

  auto* sample = app.add_subcommand("sample", "Uniform random strings of one length, one per line");
  add_grammar(sample);
  sample->add_option("--length", length, "String length")->required();
  sample->add_option("--n", n, "Number of strings")->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();
  add_length_cap(sample);

  auto* generate = app.add_subcommand("generate", "Build a train/valid/test dataset for one length band");
  add_grammar(generate);
  generate->add_option("--min-len", min_len, "Shortest string length")->capture_default_str();
  generate->add_option("--max-len", max_len, "Longest string length")->capture_default_str();
  generate->add_option("--per-length", per_length, "Strings drawn per length (n_l)")->capture_default_str();
  generate->add_option("--max-bytes", max_bytes_text, "Byte cap after shuffling, e.g. 15MB, 150KB")
      ->capture_default_str();
  generate->add_option("--seed", seed, "Random seed")->capture_default_str();
  generate->add_option("--out", out_dir, "Output directory")->required();
  generate->add_option("--splits", splits_text, "train,valid,test ratios")->capture_default_str();
  generate->add_option("--threads", threads, "Worker threads (0 = all cores); output is independent of it")
      ->capture_default_str();
  generate->add_option("--quota-cap", quota_cap, "Upper bound accepted for --per-length")->capture_default_str();
  add_length_cap(generate);

  auto* stats = app.add_subcommand("stats", "Statistics of a generated dataset");
  stats->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  stats->add_flag("--json", json, "JSON output");
  stats->add_flag("--strict", strict, "Check every line against the grammar");

  auto* oracle = app.add_subcommand("oracle", "Entropy / perplexity floor of a dataset");
  oracle->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  add_grammar(oracle);
  oracle->add_flag("--boundary", boundary, "Count end-of-string prediction as a token");
  oracle->add_flag("--json", json, "JSON output");

  auto* eval = app.add_subcommand("eval", "Train an n-gram model on train.txt and score every split");
  eval->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--order", order, "n-gram order (1..8)")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, kMaxNgramOrder));
  eval->add_option("--alpha", alpha, "Add-alpha smoothing")->capture_default_str()->check(CLI::NonNegativeNumber);
  eval->add_flag("--no-boundary", no_boundary, "Do not predict the end-of-string token");
  eval->add_flag("--json", json, "JSON output");

  auto* dot = app.add_subcommand("dot", "Minimal automaton in Graphviz DOT format");
  add_grammar(dot);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "spk: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << "run 'spk " << app.get_subcommands().front()->get_name() << " --help' for usage\n";
    return kUsageError;
  }

  std::ostream* log = verbosity > 0 ? &err : nullptr;
  try {
    // flag-level validation happens before any work
    std::uint64_t max_bytes = 0;
    std::array<double, 3> splits{};
    if (generate->parsed()) {
      try {
        max_bytes = parse_byte_size(max_bytes_text);
      } catch (const Error& e) {
        throw UsageError(std::string("--max-bytes: ") + e.what());
      }
      splits = detail::parse_splits(splits_text);
      if (min_len < 1 || min_len > max_len) throw UsageError("--min-len/--max-len: need 1 <= min <= max");
      if (max_len > length_cap) throw UsageError("--max-len exceeds --length-cap");
      if (per_length < 1 || per_length > quota_cap) throw UsageError("--per-length must be in 1..--quota-cap");
    }
    if ((count->parsed() || sample->parsed()) && length > length_cap)
      throw UsageError("--length " + std::to_string(length) + " exceeds --length-cap " + std::to_string(length_cap));

    if (check->parsed()) {
      auto g = detail::load_grammar(grammar_path);
      const bool by_scan = member_scan(g, word);
      const bool by_dfa = accepts(compile(g), word);
      if (by_scan != by_dfa) throw std::logic_error("scan and automaton disagree on '" + word + "'");
      if (by_scan) {
        out << "ACCEPT\n";
        return kOk;
      }
      out << "REJECT (forbidden subsequence: " << *forbidden_witness(g, word) << ")\n";
      return kDomainError;
    }

    if (count->parsed()) {
      auto g = detail::load_grammar(grammar_path);
      out << count_strings(compile(g), length, length_cap).str() << "\n";
      return kOk;
    }

    if (sample->parsed()) {
      auto g = detail::load_grammar(grammar_path);
      CountTable table(compile(g), length, length_cap);
      SeededRng rng(seed);
      for (std::size_t i = 0; i < n; ++i) out << sample_uniform(table, length, rng) << "\n";
      return kOk;
    }

    if (generate->parsed()) {
      DatasetSpec spec{detail::load_grammar(grammar_path)};
      spec.min_len = min_len;
      spec.max_len = max_len;
      spec.per_length_quota = per_length;
      spec.max_bytes = max_bytes;
      spec.seed = seed;
      spec.splits = splits;
      spec.length_cap = length_cap;
      spec.quota_cap = quota_cap;
      spec.threads = threads;
      auto bundle = build_dataset(spec, log);
      auto manifest = serialize(bundle, out_dir);
      for (const auto& e : manifest) out << e.path.string() << " " << e.bytes << "\n";
      out << "strings=" << bundle.size() << " train=" << bundle.train.size() << " valid=" << bundle.valid.size()
          << " test=" << bundle.test.size() << "\n";
      return kOk;
    }

    if (stats->parsed()) {
      auto bundle = load_dataset(data_dir, {strict});
      auto s = dataset_stats(bundle);
      nlohmann::ordered_json j;
      j["strings"] = s.strings;
      j["max_ldd"] = s.max_ldd;
      j["min_length"] = s.min_length;
      j["total_characters"] = s.total_characters;
      j["distinct_ratio"] = s.distinct_ratio;
      j["train"] = bundle.train.size();
      j["valid"] = bundle.valid.size();
      j["test"] = bundle.test.size();
      j["activation_span_max"] = s.max_activation_span;
      j["activation_span_mean"] = s.mean_activation_span;
      auto freq = nlohmann::ordered_json::object();
      for (const auto& [c, f] : s.symbol_frequency) freq[std::string(1, c)] = f;
      j["symbol_frequency"] = freq;
      auto lengths = nlohmann::ordered_json::object();
      for (const auto& [l, c] : s.per_length_counts) lengths[std::to_string(l)] = c;
      j["per_length_counts"] = lengths;
      if (json)
        out << j.dump(2) << "\n";
      else
        detail::print_flat(out, j);
      return kOk;
    }

    if (oracle->parsed()) {
      auto bundle = load_dataset(data_dir);
      auto g = detail::load_grammar(grammar_path);
      auto r = oracle_perplexity(bundle, compile(g), boundary);
      auto j = detail::oracle_json(r);
      if (json)
        out << j.dump(2) << "\n";
      else
        detail::print_flat(out, j);
      return kOk;
    }

    if (eval->parsed()) {
      auto bundle = load_dataset(data_dir);
      auto r = evaluate_bundle(bundle, order, alpha, !no_boundary);
      nlohmann::ordered_json j;
      j["order"] = r.order;
      j["alpha"] = r.alpha;
      j["boundary_predicted"] = r.boundary_predicted;
      j["train_perplexity"] = r.train_perplexity;
      j["valid_perplexity"] = r.valid_perplexity;
      j["test_perplexity"] = r.test_perplexity;
      j["test_cross_entropy_bits"] = r.test_cross_entropy;
      j["oracle_floor_perplexity"] = r.oracle.perplexity;
      j["oracle_floor_bits"] = r.oracle.mean_entropy;
      j["ldd_deficit_bits"] = r.ldd_deficit;
      if (json)
        out << j.dump(2) << "\n";
      else
        detail::print_flat(out, j);
      return kOk;
    }

    if (dot->parsed()) {
      out << to_dot(compile(detail::load_grammar(grammar_path)));
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "spk: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "spk: " << e.what() << "\n";
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace spk::cli
