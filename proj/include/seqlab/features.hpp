#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

// Feature strings for one token, "name=value" or a bare flag (BOS, EOS,
// bias). Sorted and duplicate-free.
using FeatureSet = std::vector<std::string>;

// Word -> cluster id in [0, K). Unknown words map to the fallback id K.
class ClusterMap {
 public:
  ClusterMap() = default;
  ClusterMap(std::unordered_map<std::string, int> clusters, int k);

  int lookup(std::string_view word) const;
  int k() const { return k_; }
  int fallback() const { return k_; }
  std::size_t size() const { return clusters_.size(); }
  bool empty() const { return clusters_.empty(); }

  // Stable 64-bit digest of K and every (word, id) entry.
  std::uint64_t digest() const;

  // Sorted by word.
  std::vector<std::pair<std::string, int>> entries() const;

 private:
  std::unordered_map<std::string, int> clusters_;
  int k_ = 0;
};

struct ClusterLoadResult {
  ClusterMap clusters;
  std::vector<std::string> warnings;
};

// "word<TAB>cluster_id" lines. K is max id + 1 unless given explicitly.
// Duplicate words keep the last id and add a warning.
ClusterLoadResult load_clusters(std::istream& in, std::optional<int> k = std::nullopt);
void write_clusters(std::ostream& out, const ClusterMap& clusters);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  // Throws DataError on a dimension mismatch or non-finite entry.
  void add(std::string word, std::vector<double> vector);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::string& word(std::size_t i) const { return words_[i]; }
  const double* vector(std::size_t i) const { return values_.data() + i * dim_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
};

// "word v1 ... vd" lines with an optional "count dim" header.
EmbeddingTable load_embeddings(std::istream& in);

struct KMeansResult {
  ClusterMap clusters;
  // Sum of squared distances after the initial assignment and after each
  // update step.
  std::vector<double> objective;
  int iterations = 0;
};

// k-means++ seeding, Lloyd iterations with Euclidean distance. Stops after
// max_iters or when no assignment changes. Words are lowercased on output.
KMeansResult cluster_embeddings(const EmbeddingTable& table, int k, std::uint64_t seed,
                                int max_iters);

// Template features for sentence[index]:
//   bias, w0=<lower>, w0.istitle=1, w0.isupper=1, w0.isdigit=1 (flags only
//   when true), w0.prefix2/3 and w0.suffix2/3 (lowercased, whole word when
//   shorter), BOS / EOS, w-2 w-1 w+1 w+2 (lowercased, when in range),
//   cluster=<id>.
FeatureSet extract_token_features(const std::vector<std::string>& tokens, std::size_t index,
                                  const ClusterMap& clusters);
FeatureSet extract_token_features(const TaggedSentence& sentence, std::size_t index,
                                  const ClusterMap& clusters);

std::vector<FeatureSet> extract_sentence_features(const std::vector<std::string>& tokens,
                                                  const ClusterMap& clusters);
std::vector<FeatureSet> extract_sentence_features(const TaggedSentence& sentence,
                                                  const ClusterMap& clusters);

// Identifies the template revision and cluster configuration a model was
// trained with.
std::uint64_t template_fingerprint(const ClusterMap& clusters);

inline constexpr std::string_view kTemplateName = "seqlab-ner-template/1";

class FeatureAlphabet {
 public:
  FeatureAlphabet() = default;

  // Appends if absent; returns the id either way.
  std::uint32_t add(const std::string& feature);
  std::optional<std::uint32_t> find(std::string_view feature) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::size_t min_frequency() const { return min_frequency_; }
  void set_min_frequency(std::size_t f) { min_frequency_ = f; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
  std::vector<std::string> names_;
  std::size_t min_frequency_ = 1;
};

// Ids go to features seen at least min_frequency times, in order of first
// occurrence. Throws DataError if nothing survives the cutoff.
FeatureAlphabet build_alphabet(const std::vector<std::vector<FeatureSet>>& sentences,
                               std::size_t min_frequency);

}  // namespace seqlab
