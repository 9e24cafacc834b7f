#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/random.hpp"

namespace seqlab::testing {

// Ten hand-labelled Cebuano news-style sentences.
inline constexpr const char* kToyCorpus =
    "Miadto\tO\nsi\tO\nJuan\tB-PER\nsa\tO\nCebu\tB-LOC\nCity\tI-LOC\n.\tO\n\n"
    "Si\tO\nMaria\tB-PER\nSantos\tI-PER\nnagtrabaho\tO\nsa\tO\nRed\tB-ORG\nCross\tI-ORG\n.\tO\n\n"
    "Ang\tO\nSunStar\tB-ORG\nCebu\tI-ORG\nnagbalita\tO\nbahin\tO\nsa\tO\nDumaguete\tB-LOC\n.\tO\n\n"
    "Nakigkita\tO\nsi\tO\nPedro\tB-PER\nkang\tO\nAna\tB-PER\nsa\tO\nManila\tB-LOC\n.\tO\n\n"
    "Ang\tO\nPhilippine\tB-ORG\nRed\tI-ORG\nCross\tI-ORG\nmitabang\tO\nsa\tO\nBohol\tB-LOC\n.\tO\n\n"
    "Gikan\tO\nsi\tO\nJose\tB-PER\nRizal\tI-PER\nsa\tO\nCalamba\tB-LOC\n.\tO\n\n"
    "Ang\tO\nDepEd\tB-ORG\nnagpahibalo\tO\nkarong\tO\nadlawa\tO\n.\tO\n\n"
    "Mibisita\tO\nang\tO\nmga\tO\ntaga\tO\nNegros\tB-LOC\nOriental\tI-LOC\n.\tO\n\n"
    "Si\tO\nTomas\tB-PER\nOsmeña\tI-PER\nmisulti\tO\nsa\tO\nCCTO\tB-ORG\n.\tO\n\n"
    "Daghang\tO\ntawo\tO\nsa\tO\nSiquijor\tB-LOC\nug\tO\nBohol\tB-LOC\n.\tO\n";

inline Corpus toy_corpus() { return parse_conll(std::string_view(kToyCorpus), "toy"); }

// Synthetic NER-like corpus drawn from small name lists, for search and CV.
inline Corpus synthetic_corpus(std::size_t sentences, std::uint64_t seed, double noise = 0.0) {
  static const std::vector<std::string> first = {"Juan", "Maria", "Pedro", "Ana", "Jose", "Rosa",
                                                 "Carlos", "Liza", "Ramon", "Nena"};
  static const std::vector<std::string> last = {"Santos", "Reyes", "Cruz", "Garcia", "Rizal",
                                                "Osmeña", "Lim", "Tan"};
  static const std::vector<std::vector<std::string>> orgs = {
      {"Red", "Cross"}, {"DepEd"}, {"SunStar", "Cebu"}, {"Cebu", "Pacific"}, {"DOH"},
      {"Philippine", "Navy"}};
  static const std::vector<std::vector<std::string>> locs = {
      {"Cebu", "City"}, {"Bohol"}, {"Dumaguete"}, {"Negros", "Oriental"}, {"Manila"},
      {"Siquijor"}, {"Davao"}};
  static const std::vector<std::string> verbs = {"miadto", "mibisita", "nakigkita", "misulti",
                                                 "mitabang", "nagbalita"};
  Rng rng(seed);
  Corpus c;
  c.source_id = "synthetic";
  auto pick = [&rng](const auto& v) -> const auto& { return v[rng.index(v.size())]; };
  auto label = [&](BioLabel l) {
    if (noise > 0.0 && rng.uniform() < noise) return BioLabel::from_index(static_cast<int>(rng.index(7)));
    return l;
  };
  for (std::size_t i = 0; i < sentences; ++i) {
    TaggedSentence s;
    auto add = [&](const std::string& tok, BioLabel l) {
      s.tokens.push_back(tok);
      s.labels.push_back(label(l));
    };
    auto add_entity = [&](const std::vector<std::string>& toks, EntityType t) {
      for (std::size_t k = 0; k < toks.size(); ++k) {
        add(toks[k], k == 0 ? BioLabel::begin(t) : BioLabel::inside(t));
      }
    };
    switch (rng.index(3)) {
      case 0:
        add(pick(verbs) == "miadto" ? "Miadto" : "Si", BioLabel::outside());
        add(pick(first), BioLabel::begin(EntityType::kPer));
        if (rng.index(2) == 0) add(pick(last), BioLabel::inside(EntityType::kPer));
        add(pick(verbs), BioLabel::outside());
        add("sa", BioLabel::outside());
        add_entity(pick(locs), EntityType::kLoc);
        break;
      case 1:
        add("Ang", BioLabel::outside());
        add_entity(pick(orgs), EntityType::kOrg);
        add(pick(verbs), BioLabel::outside());
        add("kang", BioLabel::outside());
        add(pick(first), BioLabel::begin(EntityType::kPer));
        break;
      default:
        add("Sa", BioLabel::outside());
        add_entity(pick(locs), EntityType::kLoc);
        add(",", BioLabel::outside());
        add(pick(verbs), BioLabel::outside());
        add("ang", BioLabel::outside());
        add_entity(pick(orgs), EntityType::kOrg);
        break;
    }
    add(".", BioLabel::outside());
    c.sentences.push_back(std::move(s));
  }
  return c;
}

// Random model with `features` features and `labels` labels. Integer-valued
// weights make exact ties likely.
inline CrfModel random_model(Rng& rng, std::size_t features, std::size_t labels, double scale,
                             bool integer_weights = false) {
  FeatureAlphabet alphabet;
  for (std::size_t f = 0; f < features; ++f) alphabet.add("f" + std::to_string(f));
  std::vector<std::string> names;
  for (std::size_t y = 0; y < labels; ++y) names.push_back("L" + std::to_string(y));
  CrfModel m(names, alphabet, 0);
  std::vector<double> w(m.num_weights());
  for (double& v : w) {
    v = integer_weights ? static_cast<double>(rng.index(3)) - 1.0 : scale * (2.0 * rng.uniform() - 1.0);
  }
  m.set_weights(std::move(w));
  return m;
}

inline EncodedSentence random_sentence(Rng& rng, std::size_t length, std::size_t features,
                                       std::size_t labels, std::size_t max_active = 3) {
  EncodedSentence s;
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<std::uint32_t> active;
    std::size_t n = rng.index(max_active + 1);
    for (std::size_t k = 0; k < n; ++k) active.push_back(static_cast<std::uint32_t>(rng.index(features)));
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    s.features.push_back(std::move(active));
    s.labels.push_back(static_cast<std::uint32_t>(rng.index(labels)));
  }
  return s;
}

}  // namespace seqlab::testing
