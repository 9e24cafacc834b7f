#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/features.hpp"
#include "seqlab/optimizer.hpp"

namespace seqlab {

struct TrainConfig {
  double c1 = 0.0;  // L1
  double c2 = 0.0;  // L2
  int max_iterations = 100;
  double tolerance = 1e-5;
  int period = 10;
  int memory = 6;
  int threads = 1;
};

struct TrainResult {
  CrfModel model;
  std::vector<IterationRecord> log;
  std::string stop_reason;
};

// Fits the weights of `model` (normally all zero) to labeled sentences:
// plain L-BFGS on NLL + (c2/2)|w|^2 when c1 = 0, OWL-QN with the same smooth
// part when c1 > 0.
TrainResult train(CrfModel model, std::span<const EncodedSentence> data, const TrainConfig& config);

// Labels observed in the corpus, canonical BIO order.
std::vector<std::string> label_alphabet(const Corpus& corpus);

// Unknown features are dropped. Pass an empty label span for unlabeled input.
EncodedSentence encode(const std::vector<FeatureSet>& features, const FeatureAlphabet& alphabet,
                       std::uint64_t fingerprint, std::span<const std::uint32_t> labels = {});

// Featurizes, builds the feature alphabet, encodes and trains.
TrainResult train_tagger(const Corpus& train_set, const ClusterMap& clusters,
                         const TrainConfig& config, std::size_t min_frequency = 1);

// Throws ConfigError when the cluster map does not match the model.
std::vector<LabelSequence> tag_sentences(const CrfModel& model, const ClusterMap& clusters,
                                         const std::vector<std::vector<std::string>>& sentences,
                                         bool constrained = false);
std::vector<LabelSequence> tag_corpus(const CrfModel& model, const ClusterMap& clusters,
                                      const Corpus& corpus, bool constrained = false);

void write_training_log(std::ostream& out, const std::vector<IterationRecord>& log);

struct SearchSpace {
  double c1_min = 1e-3;
  double c1_max = 10.0;
  double c2_min = 1e-3;
  double c2_max = 10.0;
  int candidates = 100;
  std::uint64_t seed = 0;
};

struct Trial {
  int index = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  double dev_f1 = 0.0;
  int iterations = 0;
  bool failed = false;
  std::string error;
};

struct SearchResult {
  TrainConfig best_config;
  CrfModel best_model;
  double best_dev_f1 = 0.0;
  int best_index = -1;
  std::vector<Trial> trials;  // sampling order
};

// Draws (c1, c2) log-uniformly, trains each candidate from `base` with those
// coefficients and keeps the best dev score (support-weighted token macro F1
// over PER/ORG/LOC). Ties go to the earlier trial. Failed trials are logged
// and skipped; if all fail a DataError is thrown. `workers` trials run at a
// time.
SearchResult random_search(const Corpus& train_set, const Corpus& dev_set,
                           const ClusterMap& clusters, const SearchSpace& space,
                           const TrainConfig& base, std::size_t min_frequency = 1,
                           int workers = 1);

void write_trials(std::ostream& out, const std::vector<Trial>& trials);

struct TypeCvStats {
  EntityType type = EntityType::kPer;
  std::vector<double> fold_f1;  // support-weighted token F1 per fold
  double mean_f1 = 0.0;
  double std_f1 = 0.0;          // population standard deviation
  double mean_unweighted_f1 = 0.0;
  double mean_span_f1 = 0.0;
};

struct CvResult {
  int folds = 0;
  std::vector<EvalReport> fold_reports;
  std::vector<TypeCvStats> per_type;  // PER, ORG, LOC with support in any fold
};

// Seeded assignment of sentences to k folds (round-robin over a shuffled
// order, or over corpus order when shuffle is false).
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed, bool shuffle);

CvResult cross_validate(const Corpus& corpus, const ClusterMap& clusters, int k,
                        const TrainConfig& config, std::uint64_t seed,
                        std::size_t min_frequency = 1, bool shuffle = true);

void write_cv_table(std::ostream& out, const CvResult& cv);
void write_cv_tsv(std::ostream& out, const CvResult& cv);

// Maps foreign tags, featurizes with the model's own template and cluster
// map, decodes and scores. The report is labeled "crosslingual".
EvalReport crosslingual_eval(const CrfModel& model, const ClusterMap& clusters,
                             const RawCorpus& foreign, const TagMap& tag_map,
                             bool constrained = false);

}  // namespace seqlab
