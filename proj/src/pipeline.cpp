#include "seqlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include "seqlab/random.hpp"

namespace seqlab {

TrainResult train(CrfModel model, std::span<const EncodedSentence> data, const TrainConfig& config) {
  if (data.empty()) throw ConfigError("training set is empty");
  if (config.c1 < 0.0 || config.c2 < 0.0) throw ConfigError("regularization must be non-negative");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");

  LbfgsOptions opt;
  opt.max_iterations = config.max_iterations;
  opt.tolerance = config.tolerance;
  opt.period = config.period;
  opt.memory = config.memory;
  opt.l1 = config.c1;

  const CrfModel& shape = model;
  auto objective = [&](std::span<const double> x, std::span<double> grad) {
    return nll_and_gradient(shape, x, data, config.c2, grad, config.threads);
  };
  std::vector<double> x0(model.weights().begin(), model.weights().end());
  OptimizeResult opt_result = minimize(objective, std::move(x0), opt);

  TrainResult result;
  result.log = std::move(opt_result.log);
  result.stop_reason = std::move(opt_result.stop_reason);
  model.set_weights(std::move(opt_result.x));
  result.model = std::move(model);
  return result;
}

std::vector<std::string> label_alphabet(const Corpus& corpus) {
  LabelCounts counts = stats(corpus);
  std::vector<std::string> out;
  for (const auto& [label, n] : counts) out.push_back(label.str());
  return out;
}

EncodedSentence encode(const std::vector<FeatureSet>& features, const FeatureAlphabet& alphabet,
                       std::uint64_t fingerprint, std::span<const std::uint32_t> labels) {
  EncodedSentence s;
  s.fingerprint = fingerprint;
  s.features.reserve(features.size());
  for (const auto& set : features) {
    std::vector<std::uint32_t> ids;
    ids.reserve(set.size());
    for (const auto& f : set) {
      if (auto id = alphabet.find(f)) ids.push_back(*id);
    }
    s.features.push_back(std::move(ids));
  }
  s.labels.assign(labels.begin(), labels.end());
  return s;
}

namespace {

struct Featurized {
  std::vector<std::vector<FeatureSet>> features;
};

Featurized featurize(const Corpus& corpus, const ClusterMap& clusters) {
  Featurized out;
  out.features.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.features.push_back(extract_sentence_features(s, clusters));
  return out;
}

std::vector<EncodedSentence> encode_labeled(const Corpus& corpus, const Featurized& feats,
                                            const FeatureAlphabet& alphabet,
                                            const std::vector<std::string>& labels,
                                            std::uint64_t fingerprint) {
  std::vector<int> label_id(BioLabel::kCount, -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_id[BioLabel::parse(labels[i])->index()] = static_cast<int>(i);
  }
  std::vector<EncodedSentence> out;
  out.reserve(corpus.sentences.size());
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    std::vector<std::uint32_t> ids;
    for (BioLabel l : corpus.sentences[si].labels) {
      int id = label_id[l.index()];
      if (id < 0) throw DataError("label " + l.str() + " is not in the model's label set");
      ids.push_back(static_cast<std::uint32_t>(id));
    }
    out.push_back(encode(feats.features[si], alphabet, fingerprint, ids));
  }
  return out;
}

struct PreparedTraining {
  CrfModel blank;
  std::vector<EncodedSentence> data;
};

PreparedTraining prepare(const Corpus& train_set, const ClusterMap& clusters,
                         std::size_t min_frequency) {
  if (train_set.sentences.empty()) throw ConfigError("training set is empty");
  Featurized feats = featurize(train_set, clusters);
  FeatureAlphabet alphabet = build_alphabet(feats.features, min_frequency);
  std::vector<std::string> labels = label_alphabet(train_set);
  const std::uint64_t fp = template_fingerprint(clusters);
  auto data = encode_labeled(train_set, feats, alphabet, labels, fp);
  return {CrfModel(std::move(labels), std::move(alphabet), fp), std::move(data)};
}

std::vector<BioLabel> model_bio_labels(const CrfModel& model) {
  std::vector<BioLabel> out;
  for (const auto& name : model.labels()) {
    auto l = BioLabel::parse(name);
    if (!l) throw DataError("model label '" + name + "' is not a BIO tag");
    out.push_back(*l);
  }
  return out;
}

}  // namespace

TrainResult train_tagger(const Corpus& train_set, const ClusterMap& clusters,
                         const TrainConfig& config, std::size_t min_frequency) {
  PreparedTraining prep = prepare(train_set, clusters, min_frequency);
  return train(std::move(prep.blank), prep.data, config);
}

std::vector<LabelSequence> tag_sentences(const CrfModel& model, const ClusterMap& clusters,
                                         const std::vector<std::vector<std::string>>& sentences,
                                         bool constrained) {
  const std::uint64_t fp = template_fingerprint(clusters);
  if (fp != model.fingerprint()) {
    throw ConfigError(
        "cluster map / feature template does not match the model (use the clusters file the "
        "model was trained with)");
  }
  const auto bio = model_bio_labels(model);
  TransitionMask mask;
  if (constrained) mask = bio_transition_mask(model.labels());
  std::vector<LabelSequence> out;
  out.reserve(sentences.size());
  for (const auto& tokens : sentences) {
    EncodedSentence s = encode(extract_sentence_features(tokens, clusters), model.features(), fp);
    auto path = viterbi(model, s, constrained ? &mask : nullptr);
    LabelSequence labels;
    labels.reserve(path.size());
    for (std::uint32_t y : path) labels.push_back(bio[y]);
    out.push_back(std::move(labels));
  }
  return out;
}

std::vector<LabelSequence> tag_corpus(const CrfModel& model, const ClusterMap& clusters,
                                      const Corpus& corpus, bool constrained) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) tokens.push_back(s.tokens);
  return tag_sentences(model, clusters, tokens, constrained);
}

void write_training_log(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << std::setprecision(17);
  for (const auto& r : log) out << r.iteration << '\t' << r.objective << '\t' << r.gradient_norm << '\n';
  out << std::setprecision(6);
}

SearchResult random_search(const Corpus& train_set, const Corpus& dev_set,
                           const ClusterMap& clusters, const SearchSpace& space,
                           const TrainConfig& base, std::size_t min_frequency, int workers) {
  if (space.candidates < 1) throw ConfigError("search needs at least one candidate");
  if (!(space.c1_min > 0.0) || !(space.c2_min > 0.0) || !(space.c1_min < space.c1_max) ||
      !(space.c2_min < space.c2_max)) {
    throw ConfigError("search bounds must be positive with lower < upper");
  }
  if (dev_set.sentences.empty()) throw ConfigError("dev set is empty");

  PreparedTraining prep = prepare(train_set, clusters, min_frequency);
  const auto dev_pred_tokens = [&] {
    std::vector<std::vector<std::string>> t;
    for (const auto& s : dev_set.sentences) t.push_back(s.tokens);
    return t;
  }();

  SearchResult result;
  Rng rng(space.seed);
  for (int i = 0; i < space.candidates; ++i) {
    Trial t;
    t.index = i;
    t.c1 = rng.log_uniform(space.c1_min, space.c1_max);
    t.c2 = rng.log_uniform(space.c2_min, space.c2_max);
    result.trials.push_back(t);
  }

  std::mutex best_mutex;
  std::optional<CrfModel> best_model;
  auto run_trial = [&](Trial& t) {
    TrainConfig cfg = base;
    cfg.c1 = t.c1;
    cfg.c2 = t.c2;
    cfg.threads = 1;
    try {
      TrainResult tr = train(prep.blank, prep.data, cfg);
      t.iterations = static_cast<int>(tr.log.size()) - 1;
      auto pred = tag_sentences(tr.model, clusters, dev_pred_tokens);
      t.dev_f1 = token_report(dev_set, pred).macro.token_weighted_f1;
      std::lock_guard lock(best_mutex);
      if (result.best_index < 0 || t.dev_f1 > result.best_dev_f1 ||
          (t.dev_f1 == result.best_dev_f1 && t.index < result.best_index)) {
        result.best_index = t.index;
        result.best_dev_f1 = t.dev_f1;
        result.best_config = cfg;
        result.best_config.threads = base.threads;
        best_model = std::move(tr.model);
      }
    } catch (const Error& e) {
      t.failed = true;
      t.error = e.what();
    }
  };

  const int n_workers = std::clamp(workers, 1, space.candidates);
  if (n_workers == 1) {
    for (auto& t : result.trials) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < space.candidates; i = next++) run_trial(result.trials[i]);
      });
    }
  }
  if (result.best_index < 0) throw DataError("random search failed: every trial failed");
  result.best_model = std::move(*best_model);
  return result;
}

void write_trials(std::ostream& out, const std::vector<Trial>& trials) {
  out << std::setprecision(17);
  out << "trial\tc1\tc2\tdev_f1\titerations\tstatus\n";
  for (const auto& t : trials) {
    out << t.index << '\t' << t.c1 << '\t' << t.c2 << '\t' << t.dev_f1 << '\t' << t.iterations
        << '\t' << (t.failed ? "failed: " + t.error : "ok") << '\n';
  }
  out << std::setprecision(6);
}

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed, bool shuffle) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (static_cast<std::size_t>(k) > n) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds sentence count " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  std::vector<int> fold(n);
  if (shuffle) {
    for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  } else {
    // Contiguous blocks in corpus order.
    for (std::size_t i = 0; i < n; ++i) {
      fold[i] = static_cast<int>(i * static_cast<std::size_t>(k) / n);
    }
  }
  return fold;
}

CvResult cross_validate(const Corpus& corpus, const ClusterMap& clusters, int k,
                        const TrainConfig& config, std::uint64_t seed, std::size_t min_frequency,
                        bool shuffle) {
  const auto folds = assign_folds(corpus.sentences.size(), k, seed, shuffle);
  CvResult cv;
  cv.folds = k;
  for (int f = 0; f < k; ++f) {
    Corpus train_part, test_part;
    train_part.source_id = corpus.source_id + ":cv-train-" + std::to_string(f);
    test_part.source_id = corpus.source_id + ":cv-test-" + std::to_string(f);
    for (std::size_t i = 0; i < folds.size(); ++i) {
      (folds[i] == f ? test_part : train_part).sentences.push_back(corpus.sentences[i]);
    }
    TrainResult tr = train_tagger(train_part, clusters, config, min_frequency);
    auto pred = tag_corpus(tr.model, clusters, test_part);
    cv.fold_reports.push_back(evaluate(test_part, pred));
  }
  for (EntityType t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc}) {
    TypeCvStats s;
    s.type = t;
    bool any = false;
    for (const auto& r : cv.fold_reports) {
      const TypeRow* row = r.type(t);
      any = any || (row && row->token_weighted.support > 0);
      s.fold_f1.push_back(row ? row->token_weighted.f1 : 0.0);
      s.mean_unweighted_f1 += (row ? row->token_unweighted.f1 : 0.0) / k;
      s.mean_span_f1 += (row ? row->span.f1 : 0.0) / k;
    }
    if (!any) continue;
    s.mean_f1 = std::accumulate(s.fold_f1.begin(), s.fold_f1.end(), 0.0) / k;
    double var = 0.0;
    for (double v : s.fold_f1) var += (v - s.mean_f1) * (v - s.mean_f1);
    s.std_f1 = std::sqrt(var / k);
    cv.per_type.push_back(std::move(s));
  }
  return cv;
}

void write_cv_table(std::ostream& out, const CvResult& cv) {
  out << cv.folds << "-fold cross-validation, token F1 per entity type\n";
  out << std::left << std::setw(8) << "Type" << std::right << std::setw(10) << "mean"
      << std::setw(10) << "std" << std::setw(14) << "unweighted" << std::setw(10) << "span";
  for (int f = 0; f < cv.folds; ++f) out << std::setw(9) << ("fold" + std::to_string(f));
  out << '\n' << std::fixed << std::setprecision(3);
  for (const auto& s : cv.per_type) {
    out << std::left << std::setw(8) << entity_name(s.type) << std::right << std::setw(10)
        << s.mean_f1 << std::setw(10) << s.std_f1 << std::setw(14) << s.mean_unweighted_f1
        << std::setw(10) << s.mean_span_f1;
    for (double v : s.fold_f1) out << std::setw(9) << v;
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

void write_cv_tsv(std::ostream& out, const CvResult& cv) {
  out << std::setprecision(17);
  out << "folds\t" << cv.folds << '\n';
  for (const auto& s : cv.per_type) {
    std::string name(entity_name(s.type));
    out << "cv." << name << ".mean_f1\t" << s.mean_f1 << '\n';
    out << "cv." << name << ".std_f1\t" << s.std_f1 << '\n';
    out << "cv." << name << ".mean_unweighted_f1\t" << s.mean_unweighted_f1 << '\n';
    out << "cv." << name << ".mean_span_f1\t" << s.mean_span_f1 << '\n';
    for (std::size_t f = 0; f < s.fold_f1.size(); ++f) {
      out << "cv." << name << ".fold" << f << ".f1\t" << s.fold_f1[f] << '\n';
    }
  }
  out << std::setprecision(6);
}

EvalReport crosslingual_eval(const CrfModel& model, const ClusterMap& clusters,
                             const RawCorpus& foreign, const TagMap& tag_map, bool constrained) {
  Corpus gold = apply_tag_map(foreign, tag_map);
  auto pred = tag_corpus(model, clusters, gold, constrained);
  EvalReport r = evaluate(gold, pred);
  r.mode = "crosslingual";
  return r;
}

}  // namespace seqlab
