#include "seqlab/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "seqlab/corpus.hpp"

namespace seqlab {

CrfModel::CrfModel(std::vector<std::string> labels, FeatureAlphabet features,
                   std::uint64_t fingerprint)
    : labels_(std::move(labels)), features_(std::move(features)), fingerprint_(fingerprint) {
  if (labels_.empty()) throw ConfigError("model needs at least one label");
  const std::size_t l = labels_.size();
  weights_.assign(features_.size() * l + l * l + l, 0.0);
}

void CrfModel::set_weights(std::vector<double> w) {
  if (w.size() != weights_.size()) {
    throw ConfigError("weight vector has " + std::to_string(w.size()) + " entries, expected " +
                      std::to_string(weights_.size()));
  }
  weights_ = std::move(w);
}

TransitionMask bio_transition_mask(const std::vector<std::string>& labels) {
  const std::size_t l = labels.size();
  std::vector<std::optional<BioLabel>> bio(l);
  for (std::size_t i = 0; i < l; ++i) bio[i] = BioLabel::parse(labels[i]);
  TransitionMask mask;
  mask.allowed.assign(l * l, true);
  mask.allowed_begin.assign(l, true);
  for (std::size_t y = 0; y < l; ++y) {
    if (!bio[y] || bio[y]->prefix() != BioPrefix::kI) continue;
    mask.allowed_begin[y] = false;
    for (std::size_t prev = 0; prev < l; ++prev) {
      if (!bio[prev]) continue;
      mask.allowed[prev * l + y] = !is_orphan(bio[prev], *bio[y]);
    }
  }
  return mask;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* v, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

void check_fingerprint(const CrfModel& model, const EncodedSentence& sentence) {
  if (model.fingerprint() != sentence.fingerprint) {
    throw ConfigError("feature configuration fingerprint mismatch between model and input");
  }
}

void check_sentence(const CrfModel& model, const EncodedSentence& sentence) {
  check_fingerprint(model, sentence);
  if (sentence.size() == 0) throw BoundsError("empty sentence");
  for (const auto& active : sentence.features) {
    for (std::uint32_t f : active) {
      if (f >= model.num_features()) {
        throw BoundsError("feature id " + std::to_string(f) + " out of range");
      }
    }
  }
}

void check_labels(const CrfModel& model, const EncodedSentence& sentence,
                  std::span<const std::uint32_t> labels) {
  if (labels.size() != sentence.size()) {
    throw BoundsError("label sequence length " + std::to_string(labels.size()) +
                      " does not match sentence length " + std::to_string(sentence.size()));
  }
  for (std::uint32_t y : labels) {
    if (y >= model.num_labels()) throw BoundsError("label id " + std::to_string(y) + " out of range");
  }
}

// Shape of the model plus a weight vector that may differ from the model's
// own (the optimizer evaluates at trial points).
struct Params {
  std::size_t labels;
  std::size_t features;
  std::span<const double> w;

  double state(std::size_t f, std::size_t y) const { return w[f * labels + y]; }
  double trans(std::size_t prev, std::size_t y) const {
    return w[features * labels + prev * labels + y];
  }
  double begin(std::size_t y) const { return w[features * labels + labels * labels + y]; }
};

Params params_of(const CrfModel& model) {
  return {model.num_labels(), model.num_features(), model.weights()};
}

std::vector<double> state_scores(const Params& p, const EncodedSentence& s) {
  const std::size_t t_len = s.size();
  std::vector<double> scores(t_len * p.labels, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    double* row = scores.data() + t * p.labels;
    for (std::uint32_t f : s.features[t]) {
      const double* w = p.w.data() + static_cast<std::size_t>(f) * p.labels;
      for (std::size_t y = 0; y < p.labels; ++y) row[y] += w[y];
    }
  }
  return scores;
}

// Forward-backward tables in log space.
struct Lattice {
  std::size_t length;
  std::size_t labels;
  std::vector<double> state;
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_z;

  Lattice(const Params& p, const EncodedSentence& s, bool with_beta)
      : length(s.size()), labels(p.labels), state(state_scores(p, s)) {
    const std::size_t l = labels;
    alpha.assign(length * l, 0.0);
    std::vector<double> buf(l);
    for (std::size_t y = 0; y < l; ++y) alpha[y] = state[y] + p.begin(y);
    for (std::size_t t = 1; t < length; ++t) {
      for (std::size_t y = 0; y < l; ++y) {
        for (std::size_t prev = 0; prev < l; ++prev) {
          buf[prev] = alpha[(t - 1) * l + prev] + p.trans(prev, y);
        }
        alpha[t * l + y] = state[t * l + y] + log_sum_exp(buf.data(), l);
      }
    }
    log_z = log_sum_exp(alpha.data() + (length - 1) * l, l);
    if (!std::isfinite(log_z)) throw NumericError("log partition is not finite");
    if (!with_beta) return;
    beta.assign(length * l, 0.0);
    for (std::size_t t = length - 1; t-- > 0;) {
      for (std::size_t prev = 0; prev < l; ++prev) {
        for (std::size_t y = 0; y < l; ++y) {
          buf[y] = p.trans(prev, y) + state[(t + 1) * l + y] + beta[(t + 1) * l + y];
        }
        beta[t * l + prev] = log_sum_exp(buf.data(), l);
      }
    }
  }

  double node(std::size_t t, std::size_t y) const {
    return std::exp(alpha[t * labels + y] + beta[t * labels + y] - log_z);
  }
  // t >= 1
  double edge(const Params& p, std::size_t t, std::size_t prev, std::size_t y) const {
    return std::exp(alpha[(t - 1) * labels + prev] + p.trans(prev, y) + state[t * labels + y] +
                    beta[t * labels + y] - log_z);
  }
};

double gold_score(const Params& p, const std::vector<double>& state,
                  std::span<const std::uint32_t> labels) {
  double s = p.begin(labels[0]) + state[labels[0]];
  for (std::size_t t = 1; t < labels.size(); ++t) {
    s += p.trans(labels[t - 1], labels[t]) + state[t * p.labels + labels[t]];
  }
  return s;
}

// Adds one sentence's contribution to loss and gradient.
double accumulate(const Params& p, const EncodedSentence& s, std::span<double> grad) {
  Lattice lat(p, s, true);
  const std::size_t l = p.labels;
  const std::size_t trans_base = p.features * l;
  const std::size_t begin_base = trans_base + l * l;
  const auto labels = std::span<const std::uint32_t>(s.labels);

  std::vector<double> node(l);
  for (std::size_t t = 0; t < lat.length; ++t) {
    for (std::size_t y = 0; y < l; ++y) node[y] = lat.node(t, y);
    for (std::uint32_t f : s.features[t]) {
      double* g = grad.data() + static_cast<std::size_t>(f) * l;
      for (std::size_t y = 0; y < l; ++y) g[y] += node[y];
      g[labels[t]] -= 1.0;
    }
    if (t == 0) {
      for (std::size_t y = 0; y < l; ++y) grad[begin_base + y] += node[y];
      grad[begin_base + labels[0]] -= 1.0;
    } else {
      for (std::size_t prev = 0; prev < l; ++prev) {
        for (std::size_t y = 0; y < l; ++y) grad[trans_base + prev * l + y] += lat.edge(p, t, prev, y);
      }
      grad[trans_base + labels[t - 1] * l + labels[t]] -= 1.0;
    }
  }
  return lat.log_z - gold_score(p, lat.state, labels);
}

}  // namespace

LogPotentials log_potentials(const CrfModel& model, const EncodedSentence& sentence) {
  check_sentence(model, sentence);
  const Params p = params_of(model);
  const auto state = state_scores(p, sentence);
  LogPotentials out;
  out.length = sentence.size();
  out.labels = p.labels;
  out.values.resize(out.length * p.labels * p.labels);
  for (std::size_t t = 0; t < out.length; ++t) {
    for (std::size_t prev = 0; prev < p.labels; ++prev) {
      for (std::size_t y = 0; y < p.labels; ++y) {
        double link = t == 0 ? p.begin(y) : p.trans(prev, y);
        out.values[(t * p.labels + prev) * p.labels + y] = state[t * p.labels + y] + link;
      }
    }
  }
  return out;
}

double log_partition(const CrfModel& model, const EncodedSentence& sentence) {
  check_sentence(model, sentence);
  return Lattice(params_of(model), sentence, false).log_z;
}

double path_score(const CrfModel& model, const EncodedSentence& sentence,
                  std::span<const std::uint32_t> labels) {
  check_sentence(model, sentence);
  check_labels(model, sentence, labels);
  const Params p = params_of(model);
  return gold_score(p, state_scores(p, sentence), labels);
}

double sequence_probability(const CrfModel& model, const EncodedSentence& sentence,
                            std::span<const std::uint32_t> labels) {
  check_sentence(model, sentence);
  check_labels(model, sentence, labels);
  const Params p = params_of(model);
  Lattice lat(p, sentence, false);
  return std::exp(gold_score(p, lat.state, labels) - lat.log_z);
}

Marginals marginals(const CrfModel& model, const EncodedSentence& sentence) {
  check_sentence(model, sentence);
  const Params p = params_of(model);
  Lattice lat(p, sentence, true);
  const std::size_t l = p.labels;
  Marginals m;
  m.length = lat.length;
  m.labels = l;
  m.node.resize(m.length * l);
  m.edge.assign(m.length * l * l, 0.0);
  for (std::size_t t = 0; t < m.length; ++t) {
    for (std::size_t y = 0; y < l; ++y) m.node[t * l + y] = lat.node(t, y);
    if (t == 0) continue;
    for (std::size_t prev = 0; prev < l; ++prev) {
      for (std::size_t y = 0; y < l; ++y) m.edge[(t * l + prev) * l + y] = lat.edge(p, t, prev, y);
    }
  }
  return m;
}

namespace {

// Scores that differ only by rounding (the same terms added in a different
// order) count as ties.
bool clearly_greater(double v, double best) {
  if (best == kNegInf) return v > best;
  return v > best + kViterbiTieTolerance * std::max(1.0, std::abs(best));
}

}  // namespace

std::vector<std::uint32_t> viterbi(const CrfModel& model, const EncodedSentence& sentence,
                                   const TransitionMask* mask) {
  check_sentence(model, sentence);
  const Params p = params_of(model);
  const std::size_t l = p.labels;
  const std::size_t t_len = sentence.size();
  const auto state = state_scores(p, sentence);
  auto begin_w = [&](std::size_t y) {
    return mask && !mask->allowed_begin[y] ? kNegInf : p.begin(y);
  };
  auto trans_w = [&](std::size_t prev, std::size_t y) {
    return mask && !mask->allowed[prev * l + y] ? kNegInf : p.trans(prev, y);
  };

  std::vector<double> delta(t_len * l);
  std::vector<std::uint32_t> back(t_len * l, 0);
  for (std::size_t y = 0; y < l; ++y) delta[y] = state[y] + begin_w(y);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t y = 0; y < l; ++y) {
      double best = kNegInf;
      std::uint32_t arg = 0;
      // Scanning upwards and replacing only on a clear win keeps the lowest
      // predecessor on ties.
      for (std::size_t prev = 0; prev < l; ++prev) {
        double v = delta[(t - 1) * l + prev] + trans_w(prev, y);
        if (clearly_greater(v, best)) {
          best = v;
          arg = static_cast<std::uint32_t>(prev);
        }
      }
      delta[t * l + y] = best + state[t * l + y];
      back[t * l + y] = arg;
    }
  }
  std::vector<std::uint32_t> path(t_len);
  double best = kNegInf;
  std::uint32_t arg = 0;
  for (std::size_t y = 0; y < l; ++y) {
    if (clearly_greater(delta[(t_len - 1) * l + y], best)) {
      best = delta[(t_len - 1) * l + y];
      arg = static_cast<std::uint32_t>(y);
    }
  }
  path[t_len - 1] = arg;
  for (std::size_t t = t_len - 1; t > 0; --t) path[t - 1] = back[t * l + path[t]];
  return path;
}

double nll_and_gradient(const CrfModel& model, std::span<const double> weights,
                        std::span<const EncodedSentence> batch, double c2,
                        std::span<double> gradient, int threads) {
  if (batch.empty()) throw ConfigError("empty training batch");
  if (weights.size() != model.num_weights() || gradient.size() != model.num_weights()) {
    throw ConfigError("weight or gradient vector has the wrong size");
  }
  for (const auto& s : batch) {
    check_sentence(model, s);
    check_labels(model, s, s.labels);
  }
  const Params p{model.num_labels(), model.num_features(), weights};
  const std::size_t n_chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                                                     batch.size()));

  std::fill(gradient.begin(), gradient.end(), 0.0);
  double loss = 0.0;
  if (n_chunks == 1) {
    for (const auto& s : batch) loss += accumulate(p, s, gradient);
  } else {
    std::vector<std::vector<double>> grads(n_chunks, std::vector<double>(gradient.size(), 0.0));
    std::vector<double> losses(n_chunks, 0.0);
    std::vector<std::exception_ptr> errors(n_chunks);
    {
      std::vector<std::jthread> workers;
      for (std::size_t c = 0; c < n_chunks; ++c) {
        workers.emplace_back([&, c] {
          try {
            std::size_t lo = batch.size() * c / n_chunks;
            std::size_t hi = batch.size() * (c + 1) / n_chunks;
            for (std::size_t i = lo; i < hi; ++i) losses[c] += accumulate(p, batch[i], grads[c]);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (std::size_t c = 0; c < n_chunks; ++c) {
      loss += losses[c];
      for (std::size_t i = 0; i < gradient.size(); ++i) gradient[i] += grads[c][i];
    }
  }
  if (c2 > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      sq += weights[i] * weights[i];
      gradient[i] += c2 * weights[i];
    }
    loss += 0.5 * c2 * sq;
  }
  if (!std::isfinite(loss)) throw NumericError("training objective is not finite");
  return loss;
}

LossAndGradient nll_and_gradient(const CrfModel& model, std::span<const EncodedSentence> batch,
                                 double c2, int threads) {
  LossAndGradient out;
  out.gradient.resize(model.num_weights());
  out.loss = nll_and_gradient(model, model.weights(), batch, c2, out.gradient, threads);
  return out;
}

}  // namespace seqlab
