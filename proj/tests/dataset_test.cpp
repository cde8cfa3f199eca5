#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "spk/dataset.hpp"

namespace {

using spk::Alphabet;
using spk::DatasetSpec;
using spk::ReplacementMode;
using spk::SpkGrammar;

SpkGrammar experiment() { return SpkGrammar::from_forbidden(Alphabet("abcd"), 2, {"ab", "bc"}); }

DatasetSpec small_spec(std::uint64_t seed = 1) {
  DatasetSpec s{experiment()};
  s.min_len = 2;
  s.max_len = 12;
  s.per_length_quota = 300;
  s.max_bytes = 20'000;
  s.seed = seed;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(SplitSizes, WithinOneOfRatio) {
  for (std::size_t n : {0u, 1u, 2u, 7u, 10u, 99u, 1000u, 12345u}) {
    auto s = spk::split_sizes(n, {0.6, 0.2, 0.2});
    EXPECT_EQ(s[0] + s[1] + s[2], n);
    EXPECT_LE(std::abs(double(s[0]) - 0.6 * n), 1.0);
    EXPECT_LE(std::abs(double(s[1]) - 0.2 * n), 1.0);
    EXPECT_LE(std::abs(double(s[2]) - 0.2 * n), 1.0);
  }
  auto all = spk::split_sizes(17, {1, 0, 0});
  EXPECT_EQ(all[0], 17u);
  EXPECT_EQ(all[1] + all[2], 0u);
}

TEST(BuildDataset, TinyBandIsTheWholeSlice) {
  DatasetSpec s{SpkGrammar::from_forbidden(Alphabet("ab"), 2, {"ab"})};
  s.min_len = 2;
  s.max_len = 2;
  s.per_length_quota = 10;
  s.max_bytes = 1000;
  auto b = spk::build_dataset(s);
  std::set<std::string> seen;
  b.for_each_string([&](const std::string& w) { seen.insert(w); });
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(seen, (std::set<std::string>{"aa", "ba", "bb"}));
  EXPECT_EQ(b.metadata.replacement_modes.at(2), ReplacementMode::without);
  EXPECT_EQ(b.metadata.per_length_counts.at(2), 3u);
}

TEST(BuildDataset, EveryStringIsInTheBandAndLanguage) {
  auto spec = small_spec();
  auto b = spk::build_dataset(spec);
  auto g = experiment();
  b.for_each_string([&](const std::string& w) {
    EXPECT_GE(w.size(), spec.min_len);
    EXPECT_LE(w.size(), spec.max_len);
    EXPECT_TRUE(spk::oracle::member_recursive(g.forbidden(), w)) << w;
  });
  EXPECT_LE(b.metadata.total_bytes, spec.max_bytes);
}

TEST(BuildDataset, MetadataIsConsistent) {
  auto spec = small_spec();
  auto b = spk::build_dataset(spec);
  const auto& m = b.metadata;
  std::uint64_t pool = 0, retained = 0, bytes = 0;
  for (const auto& [l, n] : m.per_length_counts) pool += n;
  for (const auto& [l, n] : m.retained_per_length_counts) {
    retained += n;
    EXPECT_LE(n, m.per_length_counts.at(l));
  }
  b.for_each_string([&](const std::string& w) { bytes += w.size() + 1; });
  EXPECT_EQ(pool, m.pool_size);
  EXPECT_EQ(retained, b.size());
  EXPECT_EQ(bytes, m.total_bytes);
  // 14 strings of length 2 fit whole; long lengths are sampled
  EXPECT_EQ(m.replacement_modes.at(2), ReplacementMode::without);
  EXPECT_EQ(m.per_length_counts.at(2), 14u);
  EXPECT_EQ(m.replacement_modes.at(12), ReplacementMode::with);
  EXPECT_EQ(m.per_length_counts.at(12), 300u);
  EXPECT_EQ(m.grammar_fingerprint, spk::fingerprint(spk::compile(experiment())));
}

TEST(BuildDataset, ByteCapKeepsPrefixOfShuffledPool) {
  auto spec = small_spec();
  spec.max_bytes = 1'000'000;  // nothing is dropped
  auto full = spk::build_dataset(spec);
  EXPECT_EQ(full.size(), full.metadata.pool_size);
  spec.max_bytes = 5'000;
  auto cut = spk::build_dataset(spec);
  ASSERT_LT(cut.size(), full.size());
  std::vector<std::string> a, c;
  full.for_each_string([&](const std::string& w) { a.push_back(w); });
  cut.for_each_string([&](const std::string& w) { c.push_back(w); });
  EXPECT_TRUE(std::equal(c.begin(), c.end(), a.begin()));
  // the next string would overflow the cap
  EXPECT_GT(cut.metadata.total_bytes + a[c.size()].size() + 1, spec.max_bytes);
}

TEST(BuildDataset, DeterministicAndThreadIndependent) {
  auto spec = small_spec(99);
  spec.threads = 1;
  auto one = spk::build_dataset(spec);
  spec.threads = 4;
  auto four = spk::build_dataset(spec);
  EXPECT_EQ(one, four);
  spec.seed = 100;
  EXPECT_NE(spk::build_dataset(spec).train, one.train);
}

TEST(BuildDataset, SplitRatiosRespected) {
  auto spec = small_spec();
  auto b = spk::build_dataset(spec);
  const double n = double(b.size());
  EXPECT_LE(std::abs(double(b.train.size()) - 0.6 * n), 1.0);
  EXPECT_LE(std::abs(double(b.valid.size()) - 0.2 * n), 1.0);
  EXPECT_LE(std::abs(double(b.test.size()) - 0.2 * n), 1.0);

  spec.splits = {1, 0, 0};
  auto only_train = spk::build_dataset(spec);
  EXPECT_TRUE(only_train.valid.empty());
  EXPECT_TRUE(only_train.test.empty());
  auto dir = spk::oracle::scratch_dir("only_train");
  spk::serialize(only_train, dir);
  EXPECT_EQ(std::filesystem::file_size(dir / "valid.txt"), 0u);
  EXPECT_EQ(std::filesystem::file_size(dir / "test.txt"), 0u);
  EXPECT_EQ(spk::load_dataset(dir, {true}), only_train);
}

TEST(BuildDataset, Errors) {
  auto spec = small_spec();
  spec.min_len = 5;
  spec.max_len = 4;
  EXPECT_THROW(spk::build_dataset(spec), spk::Error);
  spec = small_spec();
  spec.max_len = 600;
  EXPECT_THROW(spk::build_dataset(spec), spk::CapacityError);
  spec = small_spec();
  spec.per_length_quota = 2'000'000;
  EXPECT_THROW(spk::build_dataset(spec), spk::CapacityError);
  spec = small_spec();
  spec.splits = {0.5, 0.2, 0.2};
  EXPECT_THROW(spk::build_dataset(spec), spk::Error);
  spec = small_spec();
  spec.max_bytes = 2;
  EXPECT_THROW(spk::build_dataset(spec), spk::Error);

  // over {a} with "aa" forbidden only lengths 0 and 1 exist
  DatasetSpec empty{SpkGrammar::from_forbidden(Alphabet("a"), 2, {"aa"})};
  empty.min_len = 2;
  empty.max_len = 5;
  empty.per_length_quota = 10;
  EXPECT_THROW(spk::build_dataset(empty), spk::EmptyLanguageError);
}

TEST(Serialize, ByteIdenticalAcrossRuns) {
  auto d1 = spk::oracle::scratch_dir("run1");
  auto d2 = spk::oracle::scratch_dir("run2");
  auto m1 = spk::serialize(spk::build_dataset(small_spec(5)), d1);
  auto m2 = spk::serialize(spk::build_dataset(small_spec(5)), d2);
  ASSERT_EQ(m1.size(), 4u);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    EXPECT_EQ(m1[i].bytes, m2[i].bytes);
    EXPECT_EQ(slurp(m1[i].path), slurp(m2[i].path)) << m1[i].path;
  }
  EXPECT_EQ(slurp(d1 / "train.txt").find('\r'), std::string::npos);
}

TEST(Serialize, MetaJsonHasRequiredKeys) {
  auto dir = spk::oracle::scratch_dir("meta");
  spk::serialize(spk::build_dataset(small_spec()), dir);
  auto j = nlohmann::json::parse(slurp(dir / "meta.json"));
  for (const char* key : {"grammar_fingerprint", "k", "alphabet", "forbidden", "min_len", "max_len",
                          "per_length_quota", "max_bytes", "seed", "splits", "per_length_counts",
                          "replacement_modes", "toolkit_version"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["alphabet"], "abcd");
  EXPECT_EQ(j["toolkit_version"], spk::kToolkitVersion);
}

TEST(LoadDataset, RoundTrip) {
  auto dir = spk::oracle::scratch_dir("roundtrip");
  auto b = spk::build_dataset(small_spec(3));
  spk::serialize(b, dir);
  EXPECT_EQ(spk::load_dataset(dir), b);
  EXPECT_EQ(spk::load_dataset(dir, {true}), b);
}

TEST(LoadDataset, StrictModeNamesTheBadLine) {
  auto dir = spk::oracle::scratch_dir("tamper");
  spk::serialize(spk::build_dataset(small_spec(3)), dir);
  auto text = slurp(dir / "valid.txt");
  auto second = text.find('\n') + 1;
  auto end = text.find('\n', second);
  text.replace(second, end - second, "dddabddd");
  std::ofstream(dir / "valid.txt", std::ios::binary) << text;
  EXPECT_NO_THROW(spk::load_dataset(dir));
  try {
    spk::load_dataset(dir, {true});
    FAIL() << "expected DatasetError";
  } catch (const spk::DatasetError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("valid.txt line 2"), std::string::npos) << what;
    EXPECT_NE(what.find("ab"), std::string::npos) << what;
  }
}

TEST(LoadDataset, FingerprintMismatchAndMissingNewline) {
  auto dir = spk::oracle::scratch_dir("mismatch");
  spk::serialize(spk::build_dataset(small_spec()), dir);
  auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  meta["forbidden"] = {"ab"};
  std::ofstream(dir / "meta.json") << meta.dump(2);
  EXPECT_THROW(spk::load_dataset(dir), spk::DatasetError);

  auto dir2 = spk::oracle::scratch_dir("nonewline");
  spk::serialize(spk::build_dataset(small_spec()), dir2);
  auto text = slurp(dir2 / "test.txt");
  text.pop_back();
  std::ofstream(dir2 / "test.txt", std::ios::binary) << text;
  EXPECT_THROW(spk::load_dataset(dir2), spk::DatasetError);

  EXPECT_THROW(spk::load_dataset(spk::oracle::scratch_dir("empty_dir")), spk::IoError);
}

TEST(Shuffle, UniformPositionsOverSeeds) {
  constexpr std::size_t n = 10, seeds = 1000;
  std::vector<std::vector<double>> hits(n, std::vector<double>(n, 0));
  for (std::uint64_t s = 0; s < seeds; ++s) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    spk::SeededRng rng(spk::derive_seed(s, spk::kStreamShuffle, 0));
    spk::shuffle(v, rng);
    for (std::size_t pos = 0; pos < n; ++pos) hits[v[pos]][pos] += 1;
  }
  // Bonferroni over the ten items
  const double crit = boost::math::quantile(boost::math::chi_squared(n - 1), 1 - 0.001 / n);
  const double expected = double(seeds) / n;
  for (std::size_t item = 0; item < n; ++item) {
    double chi = 0;
    for (double h : hits[item]) chi += (h - expected) * (h - expected) / expected;
    EXPECT_LT(chi, crit) << "item " << item;
  }
}

TEST(ParseByteSize, Units) {
  EXPECT_EQ(spk::parse_byte_size("1000"), 1000u);
  EXPECT_EQ(spk::parse_byte_size("15MB"), 15'000'000u);
  EXPECT_EQ(spk::parse_byte_size("150KB"), 150'000u);
  EXPECT_EQ(spk::parse_byte_size("150kb"), 150'000u);
  EXPECT_EQ(spk::parse_byte_size("1.5GB"), 1'500'000'000u);
  EXPECT_EQ(spk::parse_byte_size("2MiB"), 2u * 1024 * 1024);
  EXPECT_EQ(spk::parse_byte_size("1Ki"), 1024u);
  EXPECT_EQ(spk::parse_byte_size("10 M"), 10'000'000u);
  for (const char* bad : {"", "MB", "12XB", "-5", "0", "1.5", "1e3", "3.2.1MB"})
    EXPECT_THROW(spk::parse_byte_size(bad), spk::Error) << bad;
}

}  // namespace
