#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "seqlab/agreement.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/features.hpp"
#include "seqlab/model_io.hpp"
#include "seqlab/pipeline.hpp"

namespace py = pybind11;
using namespace seqlab;

namespace {

// Python-side sentences are (tokens, labels) pairs of string lists.
using PySentence = std::pair<std::vector<std::string>, std::vector<std::string>>;

BioLabel label_or_throw(const std::string& s) {
  auto l = BioLabel::parse(s);
  if (!l) throw DataError("unknown label '" + s + "'");
  return *l;
}

LabelSequence to_labels(const std::vector<std::string>& xs) {
  LabelSequence out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(label_or_throw(x));
  return out;
}

std::vector<std::string> to_strings(const LabelSequence& xs) {
  std::vector<std::string> out;
  out.reserve(xs.size());
  for (BioLabel l : xs) out.push_back(l.str());
  return out;
}

Corpus to_corpus(const std::vector<PySentence>& sentences) {
  Corpus c;
  for (const auto& [tokens, labels] : sentences) {
    if (tokens.size() != labels.size()) throw AlignmentError("tokens and labels differ in length");
    if (tokens.empty()) throw DataError("empty sentence");
    c.sentences.push_back({tokens, to_labels(labels), 0});
  }
  if (c.sentences.empty()) throw EmptyCorpusError("no sentences");
  return c;
}

std::vector<PySentence> from_corpus(const Corpus& c) {
  std::vector<PySentence> out;
  for (const auto& s : c.sentences) out.emplace_back(s.tokens, to_strings(s.labels));
  return out;
}

py::dict score_dict(const Score& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  d["support"] = s.support;
  d["tp"] = s.tp;
  d["fp"] = s.fp;
  d["fn"] = s.fn;
  return d;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["mode"] = r.mode;
  d["tokens"] = r.tokens;
  d["accuracy"] = r.accuracy();
  py::dict tags;
  for (const auto& row : r.per_tag) tags[py::str(row.tag.str())] = score_dict(row.score);
  d["per_tag"] = tags;
  py::dict types;
  for (const auto& row : r.per_type) {
    py::dict t;
    t["token_weighted"] = score_dict(row.token_weighted);
    t["token_unweighted"] = score_dict(row.token_unweighted);
    t["span"] = score_dict(row.span);
    types[py::str(std::string(entity_name(row.type)))] = t;
  }
  d["per_type"] = types;
  py::dict macro;
  macro["token_weighted_f1"] = r.macro.token_weighted_f1;
  macro["token_unweighted_f1"] = r.macro.token_unweighted_f1;
  macro["span_f1"] = r.macro.span_f1;
  d["macro"] = macro;
  return d;
}

TrainConfig make_config(double c1, double c2, int max_iterations, double tolerance, int threads) {
  TrainConfig cfg;
  cfg.c1 = c1;
  cfg.c2 = c2;
  cfg.max_iterations = max_iterations;
  cfg.tolerance = tolerance;
  cfg.threads = threads;
  return cfg;
}

const ClusterMap& clusters_or_empty(const ClusterMap* c) {
  static const ClusterMap empty;
  return c ? *c : empty;
}

}  // namespace

PYBIND11_MODULE(_seqlab, m) {
  m.doc() = "BIO named-entity tagging with a linear-chain CRF";

  auto base = py::register_exception<Error>(m, "SeqlabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BoundsError>(m, "BoundsError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", data.ptr());
  py::register_exception<MappingError>(m, "MappingError", data.ptr());
  py::register_exception<FormatError>(m, "FormatError", data.ptr());
  py::register_exception<CorruptionError>(m, "CorruptionError", data.ptr());

  m.def("parse_conll", [](const std::string& text) { return from_corpus(parse_conll(std::string_view(text))); },
        py::arg("text"), "Parse two-column CoNLL text into (tokens, labels) pairs.");
  m.def("read_conll", [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path);
        return from_corpus(parse_conll(in, path));
      }, py::arg("path"));
  m.def("to_conll", [](const std::vector<PySentence>& sentences) {
        std::ostringstream out;
        write_conll(out, to_corpus(sentences));
        return out.str();
      }, py::arg("sentences"));
  m.def("repair_bio", [](const std::vector<PySentence>& sentences) {
        auto r = validate_bio(to_corpus(sentences), BioMode::kRepair);
        return py::make_tuple(from_corpus(r.corpus), r.repairs);
      }, py::arg("sentences"), "Rewrite orphan I-X labels to B-X; returns (sentences, repairs).");
  m.def("split_sizes", [](std::size_t n, double train, double dev, double test) {
        auto s = split_sizes(n, {train, dev, test});
        return py::make_tuple(s[0], s[1], s[2]);
      }, py::arg("n"), py::arg("train") = 0.8, py::arg("dev") = 0.1, py::arg("test") = 0.1);
  m.def("tokenize", &tokenize_raw, py::arg("text"));

  m.def("kappa", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        auto r = cohens_kappa({to_labels(a), to_labels(b)});
        py::dict d;
        d["observed"] = r.observed;
        d["chance"] = r.chance;
        d["kappa"] = r.kappa;
        d["tokens"] = r.total;
        return d;
      }, py::arg("labels_a"), py::arg("labels_b"));
  m.def("kappa_from_rates", &kappa_from_rates, py::arg("observed"), py::arg("chance"));

  py::class_<ClusterMap>(m, "Clusters")
      .def(py::init<>())
      .def_static("from_text", [](const std::string& text) {
        std::istringstream in(text);
        return load_clusters(in).clusters;
      }, py::arg("text"))
      .def_static("from_file", [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path);
        return load_clusters(in).clusters;
      }, py::arg("path"))
      .def("lookup", &ClusterMap::lookup, py::arg("word"))
      .def_property_readonly("k", &ClusterMap::k)
      .def("__len__", &ClusterMap::size);

  m.def("token_features", [](const std::vector<std::string>& tokens, std::size_t index, const ClusterMap* clusters) {
        return extract_token_features(tokens, index, clusters_or_empty(clusters));
      }, py::arg("tokens"), py::arg("index"), py::arg("clusters") = nullptr);

  py::class_<CrfModel>(m, "Model")
      .def_static("train", [](const std::vector<PySentence>& sentences, const ClusterMap* clusters, double c1,
                              double c2, int max_iterations, double tolerance, int threads, std::size_t min_frequency) {
        py::gil_scoped_release release;
        return train_tagger(to_corpus(sentences), clusters_or_empty(clusters),
                            make_config(c1, c2, max_iterations, tolerance, threads), min_frequency).model;
      }, py::arg("sentences"), py::arg("clusters") = nullptr, py::arg("c1") = 0.0, py::arg("c2") = 0.0,
         py::arg("max_iterations") = 100, py::arg("tolerance") = 1e-5, py::arg("threads") = 1,
         py::arg("min_frequency") = 1)
      .def("tag", [](const CrfModel& model, const std::vector<std::vector<std::string>>& sentences,
                     const ClusterMap* clusters, bool constrained) {
        std::vector<std::vector<std::string>> out;
        for (const auto& p : tag_sentences(model, clusters_or_empty(clusters), sentences, constrained)) {
          out.push_back(to_strings(p));
        }
        return out;
      }, py::arg("sentences"), py::arg("clusters") = nullptr, py::arg("constrained") = false)
      .def("to_bytes", [](const CrfModel& model) { return py::bytes(serialize_model(model)); })
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(std::string(b)); })
      .def("save", [](const CrfModel& model, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        save_model(model, out);
      }, py::arg("path"))
      .def_static("load", [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open " + path);
        return load_model(in);
      }, py::arg("path"))
      .def_property_readonly("labels", &CrfModel::labels)
      .def_property_readonly("num_features", &CrfModel::num_features)
      .def_property_readonly("weights", [](const CrfModel& model) {
        return std::vector<double>(model.weights().begin(), model.weights().end());
      });

  m.def("evaluate", [](const std::vector<PySentence>& gold, const std::vector<std::vector<std::string>>& pred) {
        std::vector<LabelSequence> p;
        for (const auto& s : pred) p.push_back(to_labels(s));
        return report_dict(evaluate(to_corpus(gold), p));
      }, py::arg("gold"), py::arg("predicted"));
  m.def("cross_validate", [](const std::vector<PySentence>& sentences, int folds, double c1, double c2,
                             std::uint64_t seed, const ClusterMap* clusters) {
        CvResult cv;
        {
          py::gil_scoped_release release;
          cv = cross_validate(to_corpus(sentences), clusters_or_empty(clusters), folds,
                              make_config(c1, c2, 100, 1e-5, 1), seed);
        }
        py::dict d;
        for (const auto& t : cv.per_type) {
          py::dict row;
          row["fold_f1"] = t.fold_f1;
          row["mean_f1"] = t.mean_f1;
          row["std_f1"] = t.std_f1;
          d[py::str(std::string(entity_name(t.type)))] = row;
        }
        return d;
      }, py::arg("sentences"), py::arg("folds") = 5, py::arg("c1") = 0.0, py::arg("c2") = 0.0,
         py::arg("seed") = 0, py::arg("clusters") = nullptr);
}
