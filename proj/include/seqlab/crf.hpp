#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqlab/features.hpp"

namespace seqlab {

// One sentence mapped to dense ids. labels is empty for unlabeled input.
struct EncodedSentence {
  std::vector<std::vector<std::uint32_t>> features;
  std::vector<std::uint32_t> labels;
  std::uint64_t fingerprint = 0;

  std::size_t size() const { return features.size(); }
};

// Linear-chain CRF parameters, flattened into one vector:
//
//   [0, F*L)            state weights, index f*L + y
//   [F*L, F*L + L*L)    transition weights, index F*L + prev*L + y
//   [F*L + L*L, +L)     begin-of-sequence weights, index F*L + L*L + y
//
// The local factor at position t is
//   exp(sum_{f active at t} state[f, y_t] + trans[y_{t-1}, y_t]),
// with the begin row standing in for trans at t = 0.
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, FeatureAlphabet features, std::uint64_t fingerprint);

  std::size_t num_labels() const { return labels_.size(); }
  std::size_t num_features() const { return features_.size(); }
  std::size_t num_weights() const { return weights_.size(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const FeatureAlphabet& features() const { return features_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  void set_weights(std::vector<double> w);

  std::size_t state_index(std::size_t f, std::size_t y) const { return f * num_labels() + y; }
  std::size_t transition_index(std::size_t prev, std::size_t y) const {
    return num_features() * num_labels() + prev * num_labels() + y;
  }
  std::size_t begin_index(std::size_t y) const {
    return num_features() * num_labels() + num_labels() * num_labels() + y;
  }

  double state(std::size_t f, std::size_t y) const { return weights_[state_index(f, y)]; }
  double transition(std::size_t prev, std::size_t y) const {
    return weights_[transition_index(prev, y)];
  }
  double begin(std::size_t y) const { return weights_[begin_index(y)]; }

 private:
  std::vector<std::string> labels_;
  FeatureAlphabet features_;
  std::uint64_t fingerprint_ = 0;
  std::vector<double> weights_;
};

// log factor values, entry (t, prev, y). At t = 0 every prev row holds the
// same values (begin weights in place of transitions).
struct LogPotentials {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t prev, std::size_t y) const {
    return values[(t * labels + prev) * labels + y];
  }
};

struct Marginals {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> node;  // [t][y]
  std::vector<double> edge;  // [t][prev][y], t >= 1; t = 0 block is zero

  double node_at(std::size_t t, std::size_t y) const { return node[t * labels + y]; }
  double edge_at(std::size_t t, std::size_t prev, std::size_t y) const {
    return edge[(t * labels + prev) * labels + y];
  }
};

// allowed[prev * L + y] for transitions, allowed_begin[y] for the first label.
struct TransitionMask {
  std::vector<bool> allowed;
  std::vector<bool> allowed_begin;
};

// Forbids O -> I-X, B-X/I-X -> I-Y (X != Y) and starting on I-X. Labels that
// are not BIO tags are left unconstrained.
TransitionMask bio_transition_mask(const std::vector<std::string>& labels);

// All of these throw ConfigError if the sentence fingerprint differs from
// the model's, and BoundsError on out-of-range feature or label ids.
LogPotentials log_potentials(const CrfModel& model, const EncodedSentence& sentence);
double log_partition(const CrfModel& model, const EncodedSentence& sentence);
double path_score(const CrfModel& model, const EncodedSentence& sentence,
                  std::span<const std::uint32_t> labels);
double sequence_probability(const CrfModel& model, const EncodedSentence& sentence,
                            std::span<const std::uint32_t> labels);
Marginals marginals(const CrfModel& model, const EncodedSentence& sentence);

// Relative score difference below which two Viterbi candidates are tied.
inline constexpr double kViterbiTieTolerance = 1e-10;

// Highest-scoring label sequence. Ties go to lower label ids, resolved from
// the last position backwards.
std::vector<std::uint32_t> viterbi(const CrfModel& model, const EncodedSentence& sentence,
                                   const TransitionMask* mask = nullptr);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// sum over the batch of (log Z - gold path score) + (c2 / 2) * |w|^2, and
// its gradient. Sentences are split into contiguous chunks, one per thread,
// and the chunk results are added in order.
LossAndGradient nll_and_gradient(const CrfModel& model, std::span<const EncodedSentence> batch,
                                 double c2, int threads = 1);

// Same objective evaluated at an arbitrary weight vector of the model's
// shape. Writes the gradient into `gradient` and returns the loss.
double nll_and_gradient(const CrfModel& model, std::span<const double> weights,
                        std::span<const EncodedSentence> batch, double c2,
                        std::span<double> gradient, int threads = 1);

}  // namespace seqlab
