#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "seqlab/features.hpp"
#include "seqlab/random.hpp"
#include "support/fixtures.hpp"

using namespace seqlab;

namespace {

bool has(const FeatureSet& f, const std::string& s) {
  return std::binary_search(f.begin(), f.end(), s);
}

bool has_prefix(const FeatureSet& f, const std::string& p) {
  return std::any_of(f.begin(), f.end(), [&](const std::string& s) { return s.rfind(p, 0) == 0; });
}

ClusterMap small_clusters() {
  std::istringstream in("si\t1\njuan\t3\nmiadto\t0\n");
  return load_clusters(in).clusters;
}

}  // namespace

TEST_CASE("single-token sentence") {
  auto f = extract_token_features(std::vector<std::string>{"Si"}, 0, small_clusters());
  CHECK(has(f, "BOS"));
  CHECK(has(f, "EOS"));
  CHECK(has(f, "w0=si"));
  CHECK(has(f, "w0.istitle=1"));
  CHECK(has(f, "cluster=1"));
  CHECK(has(f, "bias"));
  CHECK(std::is_sorted(f.begin(), f.end()));
  CHECK(std::adjacent_find(f.begin(), f.end()) == f.end());
}

TEST_CASE("digit token") {
  auto f = extract_token_features(std::vector<std::string>{"Sa", "2023"}, 1, small_clusters());
  CHECK(has(f, "w0.isdigit=1"));
  CHECK_FALSE(has(f, "w0.istitle=1"));
  CHECK(has(f, "cluster=4"));  // unknown word -> fallback K
}

TEST_CASE("context window") {
  std::vector<std::string> s{"Miadto", "si", "Juan"};
  auto f = extract_token_features(s, 2, small_clusters());
  CHECK(has(f, "w-1=si"));
  CHECK(has(f, "w-2=miadto"));
  CHECK(has(f, "EOS"));
  CHECK_FALSE(has(f, "BOS"));
  CHECK_FALSE(has_prefix(f, "w+1="));
  CHECK_FALSE(has_prefix(f, "w+2="));
  CHECK(has(f, "w0.prefix2=ju"));
  CHECK(has(f, "w0.prefix3=jua"));
  CHECK(has(f, "w0.suffix2=an"));
  CHECK(has(f, "w0.suffix3=uan"));
  CHECK(has(f, "cluster=3"));
  CHECK_THROWS_AS(extract_token_features(s, 3, small_clusters()), BoundsError);
}

TEST_CASE("short words and non-ASCII") {
  auto f = extract_token_features(std::vector<std::string>{"Osmeña", "a"}, 1, ClusterMap{});
  CHECK(has(f, "w0.prefix3=a"));
  CHECK(has(f, "w0.suffix2=a"));
  auto g = extract_token_features(std::vector<std::string>{"OSMEÑA"}, 0, ClusterMap{});
  CHECK(has(g, "w0=osmeña"));
  CHECK(has(g, "w0.suffix2=ña"));
  CHECK(has(g, "w0.isupper=1"));
}

TEST_CASE("window property on random sentences") {
  Rng rng(3);
  const std::vector<std::string> vocab{"Juan", "sa", "Cebu", "2023", ".", "DOH", "mitabang"};
  ClusterMap clusters = small_clusters();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> s;
    std::size_t n = 1 + rng.index(7);
    for (std::size_t i = 0; i < n; ++i) s.push_back(vocab[rng.index(vocab.size())]);
    auto seq = extract_sentence_features(s, clusters);
    REQUIRE(seq.size() == n);
    CHECK(has(seq.front(), "BOS"));
    CHECK(has(seq.back(), "EOS"));
    CHECK(seq == extract_sentence_features(s, clusters));
    for (std::size_t i = 0; i < n; ++i) {
      // Changing a token outside the +-2 window leaves the features alone.
      for (std::size_t j = 0; j < n; ++j) {
        if (j + 2 >= i && j <= i + 2) continue;
        auto mutated = s;
        mutated[j] = "zzz";
        CHECK(extract_token_features(mutated, i, clusters) == seq[i]);
      }
    }
  }
}

TEST_CASE("alphabet construction") {
  std::vector<std::vector<FeatureSet>> unique{{{"a", "b"}, {"c"}}};
  CHECK_THROWS_AS(build_alphabet(unique, 2), DataError);
  CHECK(build_alphabet(unique, 1).size() == 3);

  Corpus toy = testing::toy_corpus();
  std::vector<std::vector<FeatureSet>> feats;
  std::map<std::string, std::size_t> counts;
  for (const auto& s : toy.sentences) {
    feats.push_back(extract_sentence_features(s, ClusterMap{}));
    for (const auto& fs : feats.back()) {
      for (const auto& f : fs) ++counts[f];
    }
  }
  std::set<std::string> expected;
  for (const auto& [f, n] : counts) {
    if (n >= 2) expected.insert(f);
  }
  FeatureAlphabet alpha = build_alphabet(feats, 2);
  CHECK(std::set<std::string>(alpha.names().begin(), alpha.names().end()) == expected);
  CHECK(alpha.size() == expected.size());
  CHECK(alpha.min_frequency() == 2);
  CHECK(build_alphabet(feats, 1).size() == counts.size());
  // Deterministic ids.
  CHECK(build_alphabet(feats, 2).names() == alpha.names());
  for (std::uint32_t id = 0; id < alpha.size(); ++id) CHECK(alpha.find(alpha.name(id)) == id);
}

TEST_CASE("cluster files") {
  std::istringstream in("juan\t3\n");
  auto r = load_clusters(in);
  CHECK(r.clusters.k() == 4);
  CHECK(r.clusters.lookup("juan") == 3);
  CHECK(r.clusters.lookup("maria") == 4);

  std::istringstream dup("juan\t1\nmaria\t0\njuan\t2\n");
  auto d = load_clusters(dup);
  CHECK(d.clusters.lookup("juan") == 2);
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("juan") != std::string::npos);

  std::istringstream bad("juan\tx\n");
  CHECK_THROWS_AS(load_clusters(bad), FormatError);
  std::istringstream range("juan\t5\n");
  CHECK_THROWS_AS(load_clusters(range, 3), FormatError);

  std::ostringstream out;
  write_clusters(out, d.clusters);
  std::istringstream back(out.str());
  auto again = load_clusters(back, d.clusters.k());
  CHECK(again.clusters.digest() == d.clusters.digest());
  CHECK(template_fingerprint(again.clusters) == template_fingerprint(d.clusters));
  CHECK(template_fingerprint(again.clusters) != template_fingerprint(r.clusters));
}

TEST_CASE("k-means on separable clouds") {
  Rng rng(9);
  EmbeddingTable table(3);
  for (int i = 0; i < 20; ++i) {
    table.add("a" + std::to_string(i), {rng.uniform(), rng.uniform(), rng.uniform()});
    table.add("b" + std::to_string(i), {50 + rng.uniform(), 50 + rng.uniform(), 50 + rng.uniform()});
  }
  auto r = cluster_embeddings(table, 2, 1, 50);
  int ca = r.clusters.lookup("a0");
  int cb = r.clusters.lookup("b0");
  CHECK(ca != cb);
  for (int i = 0; i < 20; ++i) {
    CHECK(r.clusters.lookup("a" + std::to_string(i)) == ca);
    CHECK(r.clusters.lookup("b" + std::to_string(i)) == cb);
  }
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    CHECK(r.objective[i] <= r.objective[i - 1] + 1e-9);
  }
  auto again = cluster_embeddings(table, 2, 1, 50);
  CHECK(again.clusters.entries() == r.clusters.entries());
}

TEST_CASE("k-means degenerate k") {
  Rng rng(4);
  EmbeddingTable table(2);
  for (int i = 0; i < 6; ++i) table.add("W" + std::to_string(i), {rng.uniform(), rng.uniform()});
  auto r = cluster_embeddings(table, 6, 3, 20);
  std::set<int> ids;
  for (const auto& [w, id] : r.clusters.entries()) ids.insert(id);
  CHECK(ids.size() == 6);
  CHECK(r.clusters.lookup("w0") >= 0);  // lowercased
  CHECK_THROWS_AS(cluster_embeddings(table, 7, 3, 20), ConfigError);
  CHECK_THROWS_AS(cluster_embeddings(table, 1, 3, 20), ConfigError);
}

TEST_CASE("embedding loader") {
  std::istringstream with_header("2 3\nsi 0.1 0.2 0.3\njuan 1 2 3\n");
  auto t = load_embeddings(with_header);
  CHECK(t.size() == 2);
  CHECK(t.dim() == 3);
  std::istringstream plain("si 0.1 0.2\njuan 1 2\n");
  CHECK(load_embeddings(plain).dim() == 2);
  std::istringstream ragged("si 0.1 0.2\njuan 1\n");
  CHECK_THROWS_AS(load_embeddings(ragged), DataError);
}
