#include "seqlab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "seqlab/agreement.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/features.hpp"
#include "seqlab/model_io.hpp"
#include "seqlab/pipeline.hpp"

namespace seqlab {
namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format = "table";
  bool tsv() const { return format == "tsv"; }
};

Corpus load_corpus(const std::string& path, bool strict, std::ostream& err) {
  auto in = open_in(path);
  Corpus raw = parse_conll(in, path);
  ValidationResult v = validate_bio(raw, strict ? BioMode::kStrict : BioMode::kRepair);
  if (v.repairs > 0) {
    err << path << ": repaired " << v.repairs << " orphan I- label(s)\n";
  }
  return std::move(v.corpus);
}

ClusterMap load_cluster_file(const std::string& path, std::ostream& err) {
  if (path.empty()) return ClusterMap();
  auto in = open_in(path);
  ClusterLoadResult r = load_clusters(in);
  for (const auto& w : r.warnings) err << path << ": warning: " << w << '\n';
  return std::move(r.clusters);
}

CrfModel load_model_file(const std::string& path) {
  auto in = open_in(path, true);
  return load_model(in);
}

// Optional key=value parameter file written by `search`.
void read_params(const std::string& path, TrainConfig& cfg) {
  auto in = open_in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", n);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      if (key == "c1") cfg.c1 = std::stod(value);
      else if (key == "c2") cfg.c2 = std::stod(value);
      else if (key == "max_iterations") cfg.max_iterations = std::stoi(value);
      else if (key == "tolerance") cfg.tolerance = std::stod(value);
      else if (key == "memory") cfg.memory = std::stoi(value);
    } catch (const std::logic_error&) {
      throw ParseError("bad value for '" + key + "'", n);
    }
  }
}

void write_params(std::ostream& out, const TrainConfig& cfg) {
  out << std::setprecision(17);
  out << "c1=" << cfg.c1 << "\nc2=" << cfg.c2 << "\nmax_iterations=" << cfg.max_iterations
      << "\ntolerance=" << cfg.tolerance << "\nmemory=" << cfg.memory << '\n';
}

void add_train_options(CLI::App* app, TrainConfig& cfg, std::size_t& min_freq) {
  app->add_option("--max-iter", cfg.max_iterations, "L-BFGS iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--tolerance", cfg.tolerance, "relative objective change for convergence")
      ->capture_default_str();
  app->add_option("--memory", cfg.memory, "L-BFGS correction pairs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--min-freq", min_freq, "feature frequency cutoff")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void print_report(std::ostream& out, const EvalReport& report, bool tsv) {
  if (tsv) {
    write_eval_tsv(out, report);
  } else {
    write_eval_table(out, report);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"seqlab: BIO corpus tools and linear-chain CRF tagger for named entity recognition",
               "seqlab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file; flags take precedence");

  Common common;
  app.add_option("--seed", common.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--format", common.format, "output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "tsv"}));

  // validate
  std::string v_corpus, v_output;
  bool v_strict = false;
  auto* validate = app.add_subcommand("validate", "check BIO labels; repair orphan I- tags");
  validate->add_option("--corpus", v_corpus, "CoNLL file")->required()->check(CLI::ExistingFile);
  validate->add_flag("--strict", v_strict, "fail on orphan I- labels instead of repairing");
  validate->add_option("--output", v_output, "write the repaired corpus here");

  // stats
  std::string s_corpus;
  auto* stats_cmd = app.add_subcommand("stats", "count tokens per BIO label");
  stats_cmd->add_option("--corpus", s_corpus, "CoNLL file")->required()->check(CLI::ExistingFile);

  // kappa
  std::string k_a, k_b;
  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotations of the same tokens");
  kappa->add_option("annotator_a", k_a, "first annotator's CoNLL file")->required()->check(CLI::ExistingFile);
  kappa->add_option("annotator_b", k_b, "second annotator's CoNLL file")->required()->check(CLI::ExistingFile);

  // cluster
  std::string c_embeddings, c_output;
  int c_k = 64, c_iters = 100;
  auto* cluster = app.add_subcommand("cluster", "k-means word clusters from an embedding table");
  cluster->add_option("--embeddings", c_embeddings, "text embeddings 'word v1 ... vd'")
      ->required()
      ->check(CLI::ExistingFile);
  cluster->add_option("--k", c_k, "number of clusters")->capture_default_str();
  cluster->add_option("--max-iter", c_iters, "k-means iterations")->capture_default_str();
  cluster->add_option("--output", c_output, "cluster file 'word<TAB>id'")->required();

  // split
  std::string sp_corpus, sp_prefix;
  std::vector<double> sp_ratios{0.8, 0.1, 0.1};
  auto* split_cmd = app.add_subcommand("split", "seeded train/dev/test split");
  split_cmd->add_option("--corpus", sp_corpus, "CoNLL file")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--ratios", sp_ratios, "train,dev,test fractions")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  split_cmd->add_option("--out-prefix", sp_prefix, "writes PREFIX.{train,dev,test}.conll")->required();

  // train
  std::string t_train, t_clusters, t_model, t_log;
  bool t_strict = false;
  TrainConfig t_cfg;
  std::size_t t_min_freq = 1;
  auto* train_cmd = app.add_subcommand("train", "train a CRF tagger");
  train_cmd->add_option("--train", t_train, "training CoNLL file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--clusters", t_clusters, "cluster file")->check(CLI::ExistingFile);
  train_cmd->add_option("--model", t_model, "output model file")->required();
  train_cmd->add_option("--c1", t_cfg.c1, "L1 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--c2", t_cfg.c2, "L2 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--log", t_log, "per-iteration log 'iter<TAB>objective<TAB>grad_norm'");
  train_cmd->add_flag("--strict", t_strict, "reject orphan I- labels instead of repairing");
  add_train_options(train_cmd, t_cfg, t_min_freq);

  // search
  std::string r_train, r_dev, r_clusters, r_model, r_trials, r_params;
  SearchSpace r_space;
  TrainConfig r_cfg;
  std::size_t r_min_freq = 1;
  auto* search = app.add_subcommand("search", "randomized search over L1/L2 coefficients");
  search->add_option("--train", r_train, "training CoNLL file")->required()->check(CLI::ExistingFile);
  search->add_option("--dev", r_dev, "dev CoNLL file used to score candidates")->required()->check(CLI::ExistingFile);
  search->add_option("--clusters", r_clusters, "cluster file")->check(CLI::ExistingFile);
  search->add_option("--candidates", r_space.candidates, "number of sampled configurations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  search->add_option("--c1-min", r_space.c1_min)->capture_default_str();
  search->add_option("--c1-max", r_space.c1_max)->capture_default_str();
  search->add_option("--c2-min", r_space.c2_min)->capture_default_str();
  search->add_option("--c2-max", r_space.c2_max)->capture_default_str();
  search->add_option("--model", r_model, "write the best model here");
  search->add_option("--trials", r_trials, "write the trial log here");
  search->add_option("--params", r_params, "write the best c1/c2 as key=value");
  add_train_options(search, r_cfg, r_min_freq);

  // cv
  std::string v2_corpus, v2_clusters, v2_params;
  int v2_folds = 5;
  bool v2_no_shuffle = false;
  TrainConfig v2_cfg;
  std::size_t v2_min_freq = 1;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  cv->add_option("--corpus", v2_corpus, "CoNLL file")->required()->check(CLI::ExistingFile);
  cv->add_option("--clusters", v2_clusters, "cluster file")->check(CLI::ExistingFile);
  cv->add_option("--folds", v2_folds, "number of folds")->capture_default_str();
  cv->add_option("--c1", v2_cfg.c1, "L1 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  cv->add_option("--c2", v2_cfg.c2, "L2 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  cv->add_option("--params", v2_params, "hyperparameters written by 'search'")->check(CLI::ExistingFile);
  cv->add_flag("--no-shuffle", v2_no_shuffle, "contiguous folds in corpus order");
  add_train_options(cv, v2_cfg, v2_min_freq);

  // tag
  std::string g_model, g_clusters, g_input, g_output;
  bool g_raw = false, g_constrained = false;
  auto* tag = app.add_subcommand("tag", "label tokens with a trained model");
  tag->add_option("--model", g_model, "model file")->required()->check(CLI::ExistingFile);
  tag->add_option("--clusters", g_clusters, "cluster file used at training time")->check(CLI::ExistingFile);
  tag->add_option("--input", g_input, "token-per-line input (or raw text with --raw)")
      ->required()
      ->check(CLI::ExistingFile);
  tag->add_flag("--raw", g_raw, "input is raw text, one sentence per line");
  tag->add_option("--output", g_output, "CoNLL output (default: stdout)");
  tag->add_flag("--constrained", g_constrained, "forbid invalid BIO transitions while decoding");

  // eval
  std::string e_gold, e_pred, e_model, e_clusters, e_errors;
  bool e_constrained = false;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold labels");
  eval_cmd->add_option("--gold", e_gold, "gold CoNLL file")->required()->check(CLI::ExistingFile);
  auto* e_pred_opt = eval_cmd->add_option("--pred", e_pred, "predicted CoNLL file")->check(CLI::ExistingFile);
  auto* e_model_opt = eval_cmd->add_option("--model", e_model, "tag the gold tokens with this model")
                          ->check(CLI::ExistingFile);
  e_pred_opt->excludes(e_model_opt);
  eval_cmd->add_option("--clusters", e_clusters, "cluster file for --model")->check(CLI::ExistingFile);
  eval_cmd->add_option("--errors", e_errors, "write misclassifications here");
  eval_cmd->add_flag("--constrained", e_constrained, "constrained decoding for --model");

  // xeval
  std::string x_model, x_clusters, x_test, x_map, x_errors;
  bool x_constrained = false;
  auto* xeval = app.add_subcommand("xeval", "evaluate a model on another language's test set");
  xeval->add_option("--model", x_model, "model file")->required()->check(CLI::ExistingFile);
  xeval->add_option("--clusters", x_clusters, "cluster file used at training time")->check(CLI::ExistingFile);
  xeval->add_option("--test", x_test, "foreign CoNLL file")->required()->check(CLI::ExistingFile);
  xeval->add_option("--tag-map", x_map, "'foreign<TAB>canonical' tag map")->check(CLI::ExistingFile);
  xeval->add_option("--errors", x_errors, "write misclassifications here");
  xeval->add_flag("--constrained", x_constrained, "forbid invalid BIO transitions while decoding");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "seqlab: " << e.what() << "\n" << "Run with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (*validate) {
      auto in = open_in(v_corpus);
      Corpus corpus = parse_conll(in, v_corpus);
      ValidationResult v = validate_bio(corpus, v_strict ? BioMode::kStrict : BioMode::kRepair);
      if (common.tsv()) {
        out << "sentences\t" << v.corpus.sentences.size() << "\ntokens\t" << v.corpus.token_count()
            << "\nrepairs\t" << v.repairs << '\n';
      } else {
        out << v_corpus << ": " << v.corpus.sentences.size() << " sentences, "
            << v.corpus.token_count() << " tokens, " << v.repairs << " repair(s)\n";
        for (const auto& viol : v.violations) {
          out << "  repaired " << viol.label.str() << " at line " << viol.line << " (sentence "
              << viol.sentence << ", token " << viol.token << ")\n";
        }
      }
      if (!v_output.empty()) {
        auto o = open_out(v_output);
        write_conll(o, v.corpus);
      }
    } else if (*stats_cmd) {
      Corpus corpus = load_corpus(s_corpus, false, err);
      LabelCounts counts = stats(corpus);
      if (common.tsv()) {
        write_stats_tsv(out, counts);
      } else {
        out << s_corpus << ": " << corpus.sentences.size() << " sentences\n";
        write_stats_table(out, counts);
      }
    } else if (*kappa) {
      auto ia = open_in(k_a);
      auto ib = open_in(k_b);
      Corpus a = parse_conll(ia, k_a);
      Corpus b = parse_conll(ib, k_b);
      AnnotationPair pair = align_annotations(a, b);
      try {
        AgreementReport r = cohens_kappa(pair);
        if (common.tsv()) {
          write_agreement_tsv(out, r);
        } else {
          write_agreement_table(out, r);
        }
      } catch (const UndefinedKappaError& e) {
        write_agreement_tsv(out, e.report());
        throw;
      }
    } else if (*cluster) {
      auto in = open_in(c_embeddings);
      EmbeddingTable table = load_embeddings(in);
      KMeansResult r = cluster_embeddings(table, c_k, common.seed, c_iters);
      auto o = open_out(c_output);
      write_clusters(o, r.clusters);
      out << "clustered " << table.size() << " words into " << c_k << " clusters in "
          << r.iterations << " iteration(s), objective " << r.objective.back() << '\n';
    } else if (*split_cmd) {
      Corpus corpus = load_corpus(sp_corpus, false, err);
      SplitRatios ratios{sp_ratios[0], sp_ratios[1], sp_ratios[2]};
      CorpusSplit parts = split(corpus, ratios, common.seed);
      for (auto [name, part] : {std::pair{"train", &parts.train}, std::pair{"dev", &parts.dev},
                                std::pair{"test", &parts.test}}) {
        auto o = open_out(sp_prefix + "." + name + ".conll");
        write_conll(o, *part);
        out << name << '\t' << part->sentences.size() << '\n';
      }
    } else if (*train_cmd) {
      Corpus corpus = load_corpus(t_train, t_strict, err);
      ClusterMap clusters = load_cluster_file(t_clusters, err);
      t_cfg.threads = common.threads;
      TrainResult r = train_tagger(corpus, clusters, t_cfg, t_min_freq);
      {
        auto o = open_out(t_model, true);
        save_model(r.model, o);
      }
      if (!t_log.empty()) {
        auto o = open_out(t_log);
        write_training_log(o, r.log);
      }
      const auto& last = r.log.back();
      out << "iterations\t" << last.iteration << "\nobjective\t" << std::setprecision(17)
          << last.objective << std::setprecision(6) << "\nstop\t" << r.stop_reason
          << "\nlabels\t" << r.model.num_labels() << "\nfeatures\t" << r.model.num_features()
          << '\n';
    } else if (*search) {
      Corpus train_set = load_corpus(r_train, false, err);
      Corpus dev_set = load_corpus(r_dev, false, err);
      ClusterMap clusters = load_cluster_file(r_clusters, err);
      r_space.seed = common.seed;
      SearchResult r = random_search(train_set, dev_set, clusters, r_space, r_cfg, r_min_freq,
                                     common.threads);
      if (!r_model.empty()) {
        auto o = open_out(r_model, true);
        save_model(r.best_model, o);
      }
      if (!r_trials.empty()) {
        auto o = open_out(r_trials);
        write_trials(o, r.trials);
      }
      if (!r_params.empty()) {
        auto o = open_out(r_params);
        write_params(o, r.best_config);
      }
      out << "dev protocol\tcandidates scored on " << r_dev << '\n';
      out << std::setprecision(17) << "best_trial\t" << r.best_index << "\nbest_c1\t"
          << r.best_config.c1 << "\nbest_c2\t" << r.best_config.c2 << "\nbest_dev_f1\t"
          << r.best_dev_f1 << std::setprecision(6) << '\n';
    } else if (*cv) {
      Corpus corpus = load_corpus(v2_corpus, false, err);
      ClusterMap clusters = load_cluster_file(v2_clusters, err);
      if (!v2_params.empty()) read_params(v2_params, v2_cfg);
      v2_cfg.threads = common.threads;
      CvResult r = cross_validate(corpus, clusters, v2_folds, v2_cfg, common.seed, v2_min_freq,
                                  !v2_no_shuffle);
      out << "hyperparameters\t"
          << (v2_params.empty() ? "default (command line)" : "optimized (" + v2_params + ")")
          << std::setprecision(17) << "\nc1\t" << v2_cfg.c1 << "\nc2\t" << v2_cfg.c2
          << std::setprecision(6) << '\n';
      if (common.tsv()) {
        write_cv_tsv(out, r);
      } else {
        write_cv_table(out, r);
      }
    } else if (*tag) {
      CrfModel model = load_model_file(g_model);
      ClusterMap clusters = load_cluster_file(g_clusters, err);
      std::vector<std::vector<std::string>> sentences;
      auto in = open_in(g_input);
      if (g_raw) {
        std::string line;
        while (std::getline(in, line)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          sentences.push_back(tokenize_raw(line));
        }
        if (sentences.empty()) throw EmptyCorpusError("input contains no sentences");
      } else {
        sentences = read_token_sentences(in);
      }
      auto labels = tag_sentences(model, clusters, sentences, g_constrained);
      Corpus tagged;
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        tagged.sentences.push_back({sentences[i], labels[i], 0});
      }
      if (g_output.empty()) {
        write_conll(out, tagged);
      } else {
        auto o = open_out(g_output);
        write_conll(o, tagged);
      }
    } else if (*eval_cmd) {
      auto gin = open_in(e_gold);
      Corpus gold = parse_conll(gin, e_gold);
      std::vector<LabelSequence> pred;
      if (!e_pred.empty()) {
        auto pin = open_in(e_pred);
        Corpus p = parse_conll(pin, e_pred);
        AnnotationPair aligned = align_annotations(gold, p);  // checks token surfaces
        (void)aligned;
        for (auto& s : p.sentences) pred.push_back(std::move(s.labels));
      } else if (!e_model.empty()) {
        CrfModel model = load_model_file(e_model);
        ClusterMap clusters = load_cluster_file(e_clusters, err);
        pred = tag_corpus(model, clusters, gold, e_constrained);
      } else {
        err << "seqlab: eval needs --pred or --model\n";
        return kExitUsage;
      }
      print_report(out, evaluate(gold, pred), common.tsv());
      if (!e_errors.empty()) {
        auto o = open_out(e_errors);
        write_error_dump(o, error_dump(gold, pred));
      }
    } else if (*xeval) {
      CrfModel model = load_model_file(x_model);
      ClusterMap clusters = load_cluster_file(x_clusters, err);
      TagMap map;
      if (!x_map.empty()) {
        auto min = open_in(x_map);
        map = read_tag_map(min);
      }
      auto tin = open_in(x_test);
      RawCorpus foreign = read_conll_raw(tin, x_test);
      EvalReport report = crosslingual_eval(model, clusters, foreign, map, x_constrained);
      print_report(out, report, common.tsv());
      if (!x_errors.empty()) {
        Corpus gold = apply_tag_map(foreign, map);
        auto pred = tag_corpus(model, clusters, gold, x_constrained);
        auto o = open_out(x_errors);
        write_error_dump(o, error_dump(gold, pred));
      }
    }
  } catch (const Error& e) {
    err << "seqlab: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::kConfig: return kExitUsage;
      case ErrorKind::kData: return kExitData;
      case ErrorKind::kNumeric: return kExitNumeric;
    }
    return kExitData;
  } catch (const std::exception& e) {
    err << "seqlab: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace seqlab
