// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [--workdir DIR]
//
// DIR receives the scaled benchmark bundles (default: ./acceptance_data).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "spk/dataset.hpp"
#include "spk/eval.hpp"
#include "spk/metrics.hpp"

namespace {

namespace fs = std::filesystem;
using spk::Alphabet;
using spk::BigInt;
using spk::SpkGrammar;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << std::fixed;
  line.precision(2);
  line << secs << " s)  " << o.detail;
  std::cout << line.str() << std::endl;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SpkGrammar experiment() { return SpkGrammar::from_forbidden(Alphabet("abcd"), 2, {"ab", "bc"}); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome membership_vector() {
  const auto t0 = Clock::now();
  const auto sp2 = SpkGrammar::from_forbidden(Alphabet("abcd"), 2, {"ab"});
  const auto sp3 = SpkGrammar::from_forbidden(Alphabet("ab"), 3, {"aba"});
  struct Case {
    const SpkGrammar* g;
    const char* w;
    bool expected;
  };
  const std::vector<Case> cases{{&sp2, "bbcbdd", true},   {&sp2, "bbdbbbcbddaa", true}, {&sp2, "bbabbbcbdd", false},
                                {&sp3, "aaaaaaab", true}, {&sp3, "aaaaabaa", false},    {&sp2, "accdda", true},
                                {&sp2, "caaaaa", true},   {&sp2, "abcccc", false}};
  const auto d2 = spk::compile(sp2), d3 = spk::compile(sp3);
  int right = 0;
  std::string wrong;
  for (const auto& c : cases) {
    const auto& d = c.g == &sp2 ? d2 : d3;
    const bool scan = spk::member_scan(*c.g, c.w), dfa = spk::accepts(d, c.w);
    if (scan == c.expected && dfa == c.expected)
      ++right;
    else
      wrong += std::string(" ") + c.w;
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << right << "/8 strings classified correctly by scan and automaton" << (wrong.empty() ? "" : ", wrong:" + wrong)
    << "; limit 1 s";
  return {right == 8 && t < 1.0, d.str()};
}

Outcome dual_oracle() {
  const auto t0 = Clock::now();
  std::map<std::string, std::vector<std::string>> words;
  std::size_t grammars = 0, checks = 0, mismatches = 0, oracle_mismatches = 0;
  for (const auto& m : spk::oracle::small_family()) {
    auto& ws = words[m.symbols];
    if (ws.empty()) ws = spk::oracle::strings_upto(m.symbols, 8);
    const auto g = spk::oracle::make(m);
    const auto d = spk::compile(g);
    ++grammars;
    for (const auto& w : ws) {
      const bool scan = spk::member_scan(g, w);
      if (spk::accepts(d, w) != scan) ++mismatches;
      if (spk::oracle::member_recursive(m.forbidden, w) != scan) ++oracle_mismatches;
      ++checks;
    }
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << grammars << " grammars, " << checks << " strings (|w| <= 8): " << mismatches
    << " automaton/scan mismatches, " << oracle_mismatches << " scan/reference mismatches; limit 60 s";
  return {mismatches == 0 && oracle_mismatches == 0 && t < 60.0, d.str()};
}

Outcome counting() {
  const auto ab = SpkGrammar::from_forbidden(Alphabet("ab"), 2, {"ab"});
  spk::CountTable t(spk::compile(ab), 128);
  std::size_t closed_form_bad = 0, brute_bad = 0;
  for (std::size_t l = 0; l <= 128; ++l)
    if (t.count(l) != BigInt(l + 1)) ++closed_form_bad;
  for (std::size_t l = 0; l <= 12; ++l) {
    std::size_t n = 0;
    for (const auto& w : spk::oracle::strings_of_length("ab", l)) n += spk::oracle::member_recursive({"ab"}, w);
    if (n != l + 1) ++brute_bad;
  }
  const auto e = experiment();
  spk::CountTable te(spk::compile(e), 6);
  for (std::size_t l = 0; l <= 6; ++l) {
    std::size_t n = 0;
    for (const auto& w : spk::oracle::strings_of_length("abcd", l)) n += spk::oracle::member_recursive(e.forbidden(), w);
    if (te.count(l) != BigInt(n)) ++brute_bad;
  }
  const bool c2 = te.count(2) == 14;
  std::ostringstream d;
  d << "{ab} over {a,b}: count(l) = l+1 for l in 0..128 with " << closed_form_bad << " exceptions; {ab,bc} count(2) = "
    << te.count(2).str() << " (want 14); brute-force disagreements at small l: " << brute_bad;
  return {closed_form_bad == 0 && brute_bad == 0 && c2, d.str()};
}

Outcome minimal_size() {
  const auto e = experiment();
  const auto d = spk::compile(e);
  auto classes = spk::oracle::myhill_nerode_classes(
      "abcd", 6, 6, [&](const std::string& w) { return spk::oracle::member_recursive(e.forbidden(), w); });
  std::ostringstream out;
  out << "compile gives " << d.num_states() << " states; Myhill-Nerode classes over prefixes and suffixes of length <= 6: "
      << classes << " (want 5)";
  return {d.num_states() == 5 && classes == 5, out.str()};
}

Outcome uniform_sampling() {
  const auto t0 = Clock::now();
  constexpr std::size_t l = 4, draws = 100'000;
  spk::CountTable t(spk::compile(experiment()), l);
  const auto all = spk::enumerate_strings(t, l, 100'000);
  std::map<std::string, std::size_t> hits;
  for (const auto& w : all) hits[w] = 0;
  spk::SeededRng rng(20180102);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    auto w = spk::sample_uniform(t, l, rng);
    auto it = hits.find(w);
    if (it == hits.end())
      ++outside;
    else
      ++it->second;
  }
  const double expected = double(draws) / double(all.size());
  double chi = 0;
  for (const auto& [w, h] : hits) chi += (double(h) - expected) * (double(h) - expected) / expected;
  const double crit = boost::math::quantile(boost::math::chi_squared(double(all.size() - 1)), 0.999);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d.precision(2);
  d << std::fixed << all.size() << " strings of length 4, " << draws << " draws: chi2 = " << chi << " < " << crit
    << " (99.9%, dof " << all.size() - 1 << "); " << outside << " draws outside the language; limit 30 s";
  return {chi < crit && outside == 0 && secs < 30.0, d.str()};
}

Outcome oracle_consistency() {
  const std::vector<std::size_t> lengths{1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 30, 50, 75, 100, 150, 200, 300, 400, 500};
  constexpr std::size_t total = 100'000;
  const std::size_t per = total / lengths.size();
  spk::CountTable t(spk::compile(experiment()), 500);
  spk::SeededRng rng(7);
  double worst = 0;
  std::size_t worst_len = 0, drawn = 0;
  for (auto l : lengths) {
    double bits = 0;
    for (std::size_t i = 0; i < per; ++i) bits += spk::oracle_string_bits(t, spk::sample_uniform(t, l, rng));
    drawn += per;
    const double empirical = bits / double(per * l);
    const double analytic = spk::oracle_entropy(t, l);
    const double rel = std::abs(empirical - analytic) / analytic;
    if (rel > worst) {
      worst = rel;
      worst_len = l;
    }
  }
  std::ostringstream d;
  d << drawn << " sampled strings over " << lengths.size() << " lengths; worst relative gap " << std::scientific
    << worst << " at l = " << worst_len << " (limit 1e-3)";
  return {worst <= 1e-3 && drawn == total, d.str()};
}

struct Band {
  const char* name;
  std::size_t min_len, max_len;
  const char* cap;
  std::uint64_t quota;
};

// 1% of the sample sizes; quotas chosen so every pool overflows its cap.
const std::vector<Band> kBands{{"dataset1", 2, 20, "150KB", 2000},
                               {"dataset2", 21, 100, "500KB", 200},
                               {"dataset3", 101, 200, "1MB", 100},
                               {"dataset4", 201, 500, "2MB", 50}};

spk::DatasetSpec band_spec(const Band& b, std::size_t threads) {
  spk::DatasetSpec s{experiment()};
  s.min_len = b.min_len;
  s.max_len = b.max_len;
  s.per_length_quota = b.quota;
  s.max_bytes = spk::parse_byte_size(b.cap);
  s.seed = 2018;
  s.threads = threads;
  return s;
}

Outcome benchmark_bands(const fs::path& workdir, std::vector<spk::DatasetBundle>& bundles) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (const auto& band : kBands) {
    auto first = spk::build_dataset(band_spec(band, 0));
    auto second = spk::build_dataset(band_spec(band, 1));
    const auto dir1 = workdir / band.name, dir2 = workdir / (std::string(band.name) + "_rerun");
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    auto m1 = spk::serialize(first, dir1);
    auto m2 = spk::serialize(second, dir2);
    bool identical = m1.size() == m2.size();
    for (std::size_t i = 0; identical && i < m1.size(); ++i) identical = slurp(m1[i].path) == slurp(m2[i].path);

    auto loaded = spk::load_dataset(dir1, {true});
    auto stats = spk::dataset_stats(loaded);
    const auto cap = spk::parse_byte_size(band.cap);
    const bool lengths_ok = stats.max_ldd == band.max_len && stats.min_length >= band.min_len;
    const bool cap_ok = first.metadata.total_bytes <= cap && first.size() < first.metadata.pool_size;
    ok = ok && identical && lengths_ok && cap_ok && loaded == first;
    d << band.name << "[" << band.min_len << "," << band.max_len << "] " << first.size() << " strings "
      << first.metadata.total_bytes << "/" << cap << " B max_len " << stats.max_ldd
      << (identical ? " identical" : " DIFFERENT") << "; ";
    bundles.push_back(std::move(loaded));
  }
  const double secs = seconds_since(t0);
  d << "limit 300 s";
  return {ok && secs < 300.0, d.str()};
}

Outcome ngram_floor(const std::vector<spk::DatasetBundle>& bundles) {
  if (bundles.size() != kBands.size()) return {false, "benchmark bundles unavailable"};
  const double sigma = double(experiment().alphabet().size());
  bool ok = true;
  std::ostringstream d;
  d.precision(4);
  d << std::fixed;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    auto r = spk::evaluate_bundle(bundles[i], 2, spk::kDefaultAlpha, true);
    if (i == 0) {
      const bool floor_ok = r.test_perplexity >= r.oracle.perplexity * 0.99 && r.test_perplexity <= sigma + 1;
      ok = ok && floor_ok;
      d << kBands[i].name << " order-2 test perplexity " << r.test_perplexity << " in [" << r.oracle.perplexity * 0.99
        << ", " << sigma + 1 << "]; ";
    }
    const bool deficit_ok = kBands[i].max_len <= 2 || r.ldd_deficit > 0;
    ok = ok && deficit_ok;
    d << kBands[i].name << " deficit " << r.ldd_deficit << " bits; ";
  }
  d << "boundary predicted";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = "acceptance_data";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--workdir DIR]\n";
      return 2;
    }
  }
  fs::create_directories(workdir);

  std::vector<spk::DatasetBundle> bundles;
  report("membership-vector", membership_vector);
  report("dual-oracle-exhaustive", dual_oracle);
  report("counting-closed-form", counting);
  report("minimal-dfa-size", minimal_size);
  report("uniform-sampling-chi2", uniform_sampling);
  report("oracle-consistency", oracle_consistency);
  report("benchmark-bands-scaled", [&] { return benchmark_bands(workdir, bundles); });
  report("ngram-floor-and-ldd-deficit", [&] { return ngram_floor(bundles); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
