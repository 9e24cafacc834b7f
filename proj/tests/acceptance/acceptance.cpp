// Acceptance gate: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Criterion 7 needs an external annotated corpus and an
// embedding table; point SEQLAB_ACCEPT_CORPUS and SEQLAB_ACCEPT_EMBEDDINGS at
// them (or pass them as the first two arguments) to run it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "seqlab/agreement.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/model_io.hpp"
#include "seqlab/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace seqlab;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kKappaTarget = 0.9315;
constexpr double kKappaTol = 1e-4;
constexpr double kLogSpaceTol = 1e-8;
constexpr double kProbSumTol = 1e-8;
constexpr int kOracleInstances = 1000;
constexpr double kFdStep = 1e-5;
constexpr double kFdMaxRel = 1e-4;
constexpr int kFdInstances = 20;
constexpr double kHeavyL2 = 1e6;
constexpr double kHeavyL2MaxNorm = 1e-2;
constexpr double kSparseC1 = 0.5;
constexpr double kMinF1PerLoc = 0.70;
constexpr double kMinF1Org = 0.65;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {Outcome::kFail, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
  if (v.outcome == Outcome::kFail) ++failures;
  std::printf("[%s] %d. %s: %s (%.2fs)\n", tag, id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Verdict pass_if(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

Verdict kappa_reproduction() {
  double k = kappa_from_rates(0.9837, 0.7617);
  // Same value through a confusion matrix with those rates: 10000 tokens,
  // two categories with marginals chosen so p_e = 0.7617.
  //   p_a = p_b = p, p^2 + (1-p)^2 = 0.7617 -> p = 0.8687...
  double p = (1.0 + std::sqrt(2 * 0.7617 - 1.0)) / 2.0;
  return pass_if(std::abs(k - kKappaTarget) <= kKappaTol,
                 fmt("kappa = %.6f, target %.4f +- %.0e (p_a = p_b = %.4f)", k, kKappaTarget,
                     kKappaTol, p));
}

Verdict inference_oracle() {
  Rng rng(20240601);
  double worst_logz = 0.0, worst_sum = 0.0, worst_node = 0.0;
  int viterbi_mismatch = 0;
  for (int i = 0; i < kOracleInstances; ++i) {
    std::size_t T = 1 + rng.index(5), L = 1 + rng.index(4), F = 1 + rng.index(6);
    // A third of the models use integer weights so exact ties are exercised.
    CrfModel m = testing::random_model(rng, F, L, 3.0, i % 3 == 0);
    EncodedSentence s = testing::random_sentence(rng, T, F, L);
    auto e = testing::enumerate(m, s);
    worst_logz = std::max(worst_logz, std::abs(log_partition(m, s) - e.log_z));
    double sum = 0.0;
    testing::for_each_path(T, L, [&](const std::vector<std::uint32_t>& y) {
      sum += sequence_probability(m, s, y);
    });
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    auto mg = marginals(m, s);
    for (std::size_t k = 0; k < e.node.size(); ++k) {
      worst_node = std::max(worst_node, std::abs(mg.node[k] - e.node[k]));
    }
    for (std::size_t k = 0; k < e.edge.size(); ++k) {
      worst_node = std::max(worst_node, std::abs(mg.edge[k] - e.edge[k]));
    }
    viterbi_mismatch += viterbi(m, s) != e.best_path;
  }
  bool ok = worst_logz <= kLogSpaceTol && worst_sum <= kProbSumTol && worst_node <= kLogSpaceTol &&
            viterbi_mismatch == 0;
  return pass_if(ok, fmt("%.0f instances, max |logZ err| = %.2e, max |sum P - 1| = %.2e, "
                         "max marginal err = %.2e",
                         kOracleInstances, worst_logz, worst_sum, worst_node) +
                         ", viterbi mismatches = " + std::to_string(viterbi_mismatch));
}

Verdict gradient_check() {
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < kFdInstances; ++i) {
    std::size_t L = 2 + rng.index(3), F = 2 + rng.index(5);
    CrfModel m = testing::random_model(rng, F, L, 1.0);
    std::vector<EncodedSentence> batch;
    for (int k = 0; k < 3; ++k) batch.push_back(testing::random_sentence(rng, 1 + rng.index(5), F, L));
    double c2 = i % 2 == 0 ? 0.0 : 0.5;
    auto lg = nll_and_gradient(m, batch, c2);
    std::vector<double> w(m.weights().begin(), m.weights().end()), scratch(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto wp = w, wm = w;
      wp[j] += kFdStep;
      wm[j] -= kFdStep;
      double fd = (nll_and_gradient(m, wp, batch, c2, scratch) -
                   nll_and_gradient(m, wm, batch, c2, scratch)) / (2 * kFdStep);
      double rel = std::abs(fd - lg.gradient[j]) /
                   std::max(1.0, std::abs(fd) + std::abs(lg.gradient[j]));
      worst = std::max(worst, rel);
    }
  }
  return pass_if(worst < kFdMaxRel, fmt("%.0f instances, max relative error %.2e (limit %.0e)",
                                        kFdInstances, worst, kFdMaxRel));
}

Verdict overfit() {
  Corpus toy = testing::toy_corpus();
  TrainConfig cfg;  // c1 = c2 = 0, 100 iterations
  auto r = train_tagger(toy, ClusterMap{}, cfg);
  auto rep = evaluate(toy, tag_corpus(r.model, ClusterMap{}, toy));
  return pass_if(rep.accuracy() == 1.0 && rep.macro.span_f1 == 1.0,
                 fmt("token accuracy %.4f, span F1 %.4f after %.0f iterations", rep.accuracy(),
                     rep.macro.span_f1, static_cast<double>(r.log.size() - 1)));
}

Verdict regularization() {
  Corpus toy = testing::toy_corpus();
  TrainConfig plain;
  TrainConfig l1 = plain;
  l1.c1 = kSparseC1;
  TrainConfig l2 = plain;
  l2.c2 = kHeavyL2;
  auto zeros = [](const CrfModel& m) {
    return static_cast<double>(std::count(m.weights().begin(), m.weights().end(), 0.0));
  };
  auto a = train_tagger(toy, ClusterMap{}, plain);
  auto b = train_tagger(toy, ClusterMap{}, l1);
  auto c = train_tagger(toy, ClusterMap{}, l2);
  double norm = 0.0;
  for (double v : c.model.weights()) norm += v * v;
  norm = std::sqrt(norm);
  bool ok = zeros(b.model) > zeros(a.model) && norm <= kHeavyL2MaxNorm;
  return pass_if(ok, fmt("zeros: c1=%.1f -> %.0f, c1=0 -> %.0f; |w| at c2=1e6 = %.2e", kSparseC1,
                         zeros(b.model), zeros(a.model), norm));
}

LabelSequence labels(std::initializer_list<const char*> xs) {
  LabelSequence out;
  for (const char* x : xs) out.push_back(*BioLabel::parse(x));
  return out;
}

Verdict eval_fixture() {
  Corpus gold;
  std::vector<LabelSequence> golds = {labels({"B-PER", "I-PER", "O", "B-LOC"}),
                                      labels({"O", "B-ORG", "I-ORG", "O"}),
                                      labels({"B-LOC", "O", "B-PER"}), labels({"O", "O", "B-ORG"}),
                                      labels({"B-PER", "I-PER", "I-PER"})};
  for (const auto& g : golds) {
    TaggedSentence s;
    s.tokens.assign(g.size(), "w");
    s.labels = g;
    gold.sentences.push_back(s);
  }
  std::vector<LabelSequence> pred = {labels({"B-PER", "O", "O", "B-LOC"}),
                                     labels({"O", "B-ORG", "I-ORG", "O"}),
                                     labels({"B-ORG", "O", "B-PER"}), labels({"O", "B-PER", "B-ORG"}),
                                     labels({"B-PER", "I-PER", "O"})};
  // Hand-counted confusion: tag -> (tp, fp, fn).
  struct Row {
    const char* tag;
    std::size_t tp, fp, fn;
  };
  const Row expected[] = {{"B-PER", 3, 1, 0}, {"I-PER", 1, 0, 2}, {"B-ORG", 2, 1, 0},
                          {"I-ORG", 1, 0, 0}, {"B-LOC", 1, 0, 1}};
  auto r = token_report(gold, pred);
  bool ok = r.tokens == 17 && r.correct == 13 && r.per_tag.size() == 5;
  for (const auto& e : expected) {
    const TagRow* row = r.tag(*BioLabel::parse(e.tag));
    ok = ok && row && row->score.tp == e.tp && row->score.fp == e.fp && row->score.fn == e.fn;
    if (!row) continue;
    double p = e.tp + e.fp ? double(e.tp) / double(e.tp + e.fp) : 0.0;
    double rc = e.tp + e.fn ? double(e.tp) / double(e.tp + e.fn) : 0.0;
    double f = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
    ok = ok && row->score.precision == p && row->score.recall == rc && row->score.f1 == f &&
         row->score.support == e.tp + e.fn;
  }
  auto perfect = token_report(gold, golds);
  bool all_ones = perfect.accuracy() == 1.0;
  for (const auto& row : perfect.per_tag) {
    all_ones = all_ones && row.score.precision == 1.0 && row.score.recall == 1.0 && row.score.f1 == 1.0;
  }
  return pass_if(ok && all_ones, std::string("fixture counts ") + (ok ? "match" : "DIFFER") +
                                     ", perfect predictions " + (all_ones ? "all ones" : "NOT all ones"));
}

Verdict full_reproduction(const char* corpus_path, const char* embeddings_path) {
  if (!corpus_path || !embeddings_path) {
    return {Outcome::kSkip,
            "not run: needs the public annotated Cebuano corpus and a Cebuano embedding table "
            "(set SEQLAB_ACCEPT_CORPUS and SEQLAB_ACCEPT_EMBEDDINGS)"};
  }
  std::ifstream cin_(corpus_path);
  if (!cin_) return {Outcome::kFail, std::string("cannot open ") + corpus_path};
  Corpus corpus = validate_bio(parse_conll(cin_, corpus_path), BioMode::kRepair).corpus;
  std::ifstream ein(embeddings_path);
  if (!ein) return {Outcome::kFail, std::string("cannot open ") + embeddings_path};
  EmbeddingTable table = load_embeddings(ein);
  ClusterMap clusters = cluster_embeddings(table, 64, 1, 100).clusters;
  auto parts = split(corpus, {0.8, 0.1, 0.1}, 1);
  SearchSpace space;  // 100 candidates over [1e-3, 10]^2
  space.seed = 1;
  TrainConfig base;
  auto search = random_search(parts.train, parts.dev, clusters, space, base, 1, 4);
  auto rep = evaluate(parts.test, tag_corpus(search.best_model, clusters, parts.test));
  auto f1 = [&](EntityType t) {
    const TypeRow* row = rep.type(t);
    return row ? row->token_weighted.f1 : 0.0;
  };
  double per = f1(EntityType::kPer), org = f1(EntityType::kOrg), loc = f1(EntityType::kLoc);
  bool ok = per >= kMinF1PerLoc && loc >= kMinF1PerLoc && org >= kMinF1Org;
  return pass_if(ok, fmt("test F1 PER %.3f LOC %.3f ORG %.3f (best c1=%.4g)", per, loc, org,
                         search.best_config.c1) +
                         fmt(" c2=%.4g; limits %.2f/%.2f/%.2f", search.best_config.c2, kMinF1PerLoc,
                             kMinF1PerLoc, kMinF1Org));
}

Verdict crosslingual_harness() {
  Corpus data = testing::synthetic_corpus(80, 31, 0.05);
  auto parts = split(data, {0.8, 0.1, 0.1}, 31);
  auto model = train_tagger(parts.train, ClusterMap{}, TrainConfig{}).model;

  std::ostringstream text;
  write_conll(text, parts.test);
  std::istringstream in(text.str());
  auto x = crosslingual_eval(model, ClusterMap{}, read_conll_raw(in), {});
  auto direct = evaluate(parts.test, tag_corpus(model, ClusterMap{}, parts.test));
  bool same = x.tokens == direct.tokens && x.correct == direct.correct &&
              x.per_tag.size() == direct.per_tag.size() &&
              x.macro.token_weighted_f1 == direct.macro.token_weighted_f1 &&
              x.macro.span_f1 == direct.macro.span_f1;
  for (std::size_t i = 0; same && i < x.per_tag.size(); ++i) {
    const auto& a = x.per_tag[i].score;
    const auto& b = direct.per_tag[i].score;
    same = a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 && a.support == b.support;
  }

  // A foreign file with its own tag inventory.
  std::istringstream foreign(
      "Si\tO\nJose\tB-PERSON\nRizal\tI-PERSON\nay\tO\nnasa\tO\nMaynila\tB-GPE\n.\tO\n\n"
      "Ang\tO\nDepartment\tB-ORGANIZATION\nof\tI-ORGANIZATION\nHealth\tI-ORGANIZATION\n.\tO\n");
  TagMap map{{"B-PERSON", "B-PER"}, {"I-PERSON", "I-PER"}, {"B-GPE", "B-LOC"},
             {"I-GPE", "I-LOC"},     {"B-ORGANIZATION", "B-ORG"}, {"I-ORGANIZATION", "I-ORG"}};
  auto fx = crosslingual_eval(model, ClusterMap{}, read_conll_raw(foreign), map);
  std::ostringstream table;
  write_eval_table(table, fx);
  bool full = fx.tokens == 12 && fx.has_token_scores && fx.has_span_scores && !fx.per_type.empty() &&
              !table.str().empty();
  return pass_if(same && full, std::string("self-evaluation ") + (same ? "identical" : "DIFFERS") +
                                   ", foreign file report " + (full ? "complete" : "INCOMPLETE"));
}

Verdict serialization() {
  TrainConfig cfg;
  cfg.c2 = 0.05;
  Corpus data = testing::synthetic_corpus(40, 8, 0.05);
  auto model = train_tagger(data, ClusterMap{}, cfg).model;
  std::string bytes = serialize_model(model);
  CrfModel back = deserialize_model(bytes);
  Corpus probe = testing::synthetic_corpus(60, 99, 0.0);
  bool preds = tag_corpus(back, ClusterMap{}, probe) == tag_corpus(model, ClusterMap{}, probe) &&
               tag_corpus(back, ClusterMap{}, probe, true) == tag_corpus(model, ClusterMap{}, probe, true);
  bool weights = std::memcmp(back.weights().data(), model.weights().data(),
                             model.num_weights() * sizeof(double)) == 0;
  bool resave = serialize_model(back) == bytes;
  return pass_if(preds && weights && resave,
                 std::string("predictions ") + (preds ? "identical" : "DIFFER") + ", weights " +
                     (weights ? "bit-identical" : "DIFFER") + ", re-save " +
                     (resave ? "byte-identical" : "DIFFERS") + " (" + std::to_string(bytes.size()) +
                     " bytes)");
}

}  // namespace

int main(int argc, char** argv) {
  const char* corpus = argc > 2 ? argv[1] : std::getenv("SEQLAB_ACCEPT_CORPUS");
  const char* embeddings = argc > 2 ? argv[2] : std::getenv("SEQLAB_ACCEPT_EMBEDDINGS");

  report(1, "kappa from observed/chance agreement", kappa_reproduction);
  report(2, "inference vs exhaustive enumeration", inference_oracle);
  report(3, "gradient vs central finite differences", gradient_check);
  report(4, "overfit sanity on the toy corpus", overfit);
  report(5, "regularization behaviour", regularization);
  report(6, "token report on the hand-counted fixture", eval_fixture);
  report(7, "full-data reproduction", [&] { return full_reproduction(corpus, embeddings); });
  report(8, "crosslingual harness", crosslingual_harness);
  report(9, "model serialization", serialization);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
