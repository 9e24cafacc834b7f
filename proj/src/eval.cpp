#include "seqlab/eval.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace seqlab {

SpanExtraction extract_spans(const LabelSequence& labels) {
  SpanExtraction out;
  std::optional<BioLabel> prev;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BioLabel l = labels[i];
    if (l.is_outside()) {
      prev = l;
      continue;
    }
    bool continues = l.prefix() == BioPrefix::kI && !is_orphan(prev, l);
    if (continues) {
      out.spans.back().end = i;
    } else {
      if (l.prefix() == BioPrefix::kI) ++out.orphans;
      out.spans.push_back({l.type(), i, i});
    }
    prev = l;
  }
  return out;
}

Score score_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Score s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.support = tp + fn;
  if (tp + fp == 0) {
    s.precision_undefined = true;
  } else {
    s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    s.recall_undefined = true;
  } else {
    s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

const TagRow* EvalReport::tag(BioLabel label) const {
  for (const auto& r : per_tag) {
    if (r.tag == label) return &r;
  }
  return nullptr;
}

const TypeRow* EvalReport::type(EntityType t) const {
  for (const auto& r : per_type) {
    if (r.type == t) return &r;
  }
  return nullptr;
}

void check_shape(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  if (gold.sentences.size() != pred.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.sentences.size()) +
                         " sentences, prediction has " + std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (gold.sentences[i].size() != pred[i].size()) {
      throw AlignmentError("sentence " + std::to_string(i) + ": gold length " +
                           std::to_string(gold.sentences[i].size()) + ", prediction length " +
                           std::to_string(pred[i].size()));
    }
  }
}

namespace {

constexpr std::size_t kTypes = kEntityTypes.size();

struct TagCounts {
  std::array<std::size_t, BioLabel::kCount> tp{}, fp{}, fn{}, gold{}, pred{};
  std::size_t tokens = 0;
  std::size_t correct = 0;
};

TagCounts count_tags(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  TagCounts c;
  for (std::size_t si = 0; si < pred.size(); ++si) {
    const auto& g = gold.sentences[si].labels;
    for (std::size_t ti = 0; ti < g.size(); ++ti) {
      int gi = g[ti].index();
      int pi = pred[si][ti].index();
      ++c.gold[gi];
      ++c.pred[pi];
      ++c.tokens;
      if (gi == pi) {
        ++c.tp[gi];
        ++c.correct;
      } else {
        ++c.fn[gi];
        ++c.fp[pi];
      }
    }
  }
  return c;
}

std::array<bool, kTypes> types_with_gold(const TagCounts& c) {
  std::array<bool, kTypes> out{};
  for (EntityType t : kEntityTypes) {
    out[static_cast<int>(t)] = c.gold[BioLabel::begin(t).index()] + c.gold[BioLabel::inside(t).index()] > 0;
  }
  return out;
}

TypeRow& row_for(EvalReport& r, EntityType t) {
  for (auto& row : r.per_type) {
    if (row.type == t) return row;
  }
  r.per_type.push_back({t, {}, {}, {}});
  std::sort(r.per_type.begin(), r.per_type.end(),
            [](const TypeRow& a, const TypeRow& b) { return a.type < b.type; });
  for (auto& row : r.per_type) {
    if (row.type == t) return row;
  }
  return r.per_type.back();
}

void fill_token(EvalReport& r, const TagCounts& c) {
  r.tokens = c.tokens;
  r.correct = c.correct;
  r.per_tag.clear();
  for (int i = 1; i < BioLabel::kCount; ++i) {
    if (c.gold[i] == 0 && c.pred[i] == 0) continue;
    r.per_tag.push_back({BioLabel::from_index(i), score_from_counts(c.tp[i], c.fp[i], c.fn[i])});
  }
  for (EntityType t : kEntityTypes) {
    std::vector<const Score*> rows;
    for (BioLabel l : {BioLabel::begin(t), BioLabel::inside(t)}) {
      if (const TagRow* tr = r.tag(l)) rows.push_back(&tr->score);
    }
    if (rows.empty()) continue;
    Score weighted, unweighted;
    double total = 0.0;
    for (const Score* s : rows) {
      total += static_cast<double>(s->support);
      weighted.tp += s->tp;
      weighted.fp += s->fp;
      weighted.fn += s->fn;
      weighted.support += s->support;
      unweighted.precision += s->precision / static_cast<double>(rows.size());
      unweighted.recall += s->recall / static_cast<double>(rows.size());
      unweighted.f1 += s->f1 / static_cast<double>(rows.size());
    }
    if (total > 0.0) {
      for (const Score* s : rows) {
        double w = static_cast<double>(s->support) / total;
        weighted.precision += w * s->precision;
        weighted.recall += w * s->recall;
        weighted.f1 += w * s->f1;
      }
    } else {
      weighted.precision_undefined = weighted.recall_undefined = true;
    }
    unweighted.tp = weighted.tp;
    unweighted.fp = weighted.fp;
    unweighted.fn = weighted.fn;
    unweighted.support = weighted.support;
    TypeRow& row = row_for(r, t);
    row.token_weighted = weighted;
    row.token_unweighted = unweighted;
  }
  r.has_token_scores = true;
}

void fill_macro(EvalReport& r, const std::array<bool, kTypes>& gold_types) {
  MacroScores m;
  for (EntityType t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc}) {
    if (gold_types[static_cast<int>(t)]) m.types.push_back(t);
  }
  if (!m.types.empty()) {
    const double n = static_cast<double>(m.types.size());
    for (EntityType t : m.types) {
      const TypeRow* row = r.type(t);
      if (!row) continue;
      m.token_weighted_precision += row->token_weighted.precision / n;
      m.token_weighted_recall += row->token_weighted.recall / n;
      m.token_weighted_f1 += row->token_weighted.f1 / n;
      m.token_unweighted_f1 += row->token_unweighted.f1 / n;
      m.span_precision += row->span.precision / n;
      m.span_recall += row->span.recall / n;
      m.span_f1 += row->span.f1 / n;
    }
  }
  r.macro = m;
}

void fill_span(EvalReport& r, const Corpus& gold, const std::vector<LabelSequence>& pred) {
  std::array<std::size_t, kTypes> tp{}, fp{}, fn{};
  std::array<bool, kTypes> seen{};
  r.gold_orphans = r.predicted_orphans = 0;
  for (std::size_t si = 0; si < pred.size(); ++si) {
    auto g = extract_spans(gold.sentences[si].labels);
    auto p = extract_spans(pred[si]);
    r.gold_orphans += g.orphans;
    r.predicted_orphans += p.orphans;
    std::sort(g.spans.begin(), g.spans.end());
    std::sort(p.spans.begin(), p.spans.end());
    std::vector<Span> common;
    std::set_intersection(g.spans.begin(), g.spans.end(), p.spans.begin(), p.spans.end(),
                          std::back_inserter(common));
    for (const Span& s : g.spans) {
      ++fn[static_cast<int>(s.type)];
      seen[static_cast<int>(s.type)] = true;
    }
    for (const Span& s : p.spans) {
      ++fp[static_cast<int>(s.type)];
      seen[static_cast<int>(s.type)] = true;
    }
    for (const Span& s : common) {
      ++tp[static_cast<int>(s.type)];
      --fn[static_cast<int>(s.type)];
      --fp[static_cast<int>(s.type)];
    }
  }
  for (EntityType t : kEntityTypes) {
    int i = static_cast<int>(t);
    if (!seen[i]) continue;
    row_for(r, t).span = score_from_counts(tp[i], fp[i], fn[i]);
  }
  r.has_span_scores = true;
}

}  // namespace

EvalReport token_report(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  check_shape(gold, pred);
  EvalReport r;
  TagCounts c = count_tags(gold, pred);
  fill_token(r, c);
  fill_macro(r, types_with_gold(c));
  return r;
}

EvalReport span_report(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  check_shape(gold, pred);
  EvalReport r;
  TagCounts c = count_tags(gold, pred);
  r.tokens = c.tokens;
  r.correct = c.correct;
  fill_span(r, gold, pred);
  fill_macro(r, types_with_gold(c));
  return r;
}

EvalReport evaluate(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  check_shape(gold, pred);
  EvalReport r;
  TagCounts c = count_tags(gold, pred);
  fill_token(r, c);
  fill_span(r, gold, pred);
  fill_macro(r, types_with_gold(c));
  return r;
}

std::vector<ErrorEntry> error_dump(const Corpus& gold, const std::vector<LabelSequence>& pred) {
  check_shape(gold, pred);
  std::vector<ErrorEntry> out;
  for (std::size_t si = 0; si < pred.size(); ++si) {
    const auto& s = gold.sentences[si];
    for (std::size_t ti = 0; ti < s.size(); ++ti) {
      if (s.labels[ti] == pred[si][ti]) continue;
      std::string context;
      std::size_t lo = ti >= 2 ? ti - 2 : 0;
      std::size_t hi = std::min(s.size(), ti + 3);
      for (std::size_t k = lo; k < hi; ++k) {
        if (!context.empty()) context += ' ';
        context += k == ti ? "[" + s.tokens[k] + "]" : s.tokens[k];
      }
      out.push_back({si, ti, s.tokens[ti], s.labels[ti], pred[si][ti], std::move(context)});
    }
  }
  return out;
}

namespace {

std::string fmt(double v, bool undefined) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3) << v;
  if (undefined) o << '*';
  return o.str();
}

void score_line(std::ostream& out, const std::string& name, const Score& s) {
  out << std::left << std::setw(10) << name << std::right << std::setw(11)
      << fmt(s.precision, s.precision_undefined) << std::setw(10)
      << fmt(s.recall, s.recall_undefined) << std::setw(10) << fmt(s.f1, false) << std::setw(10)
      << s.support << '\n';
}

void header(std::ostream& out, const std::string& first) {
  out << std::left << std::setw(10) << first << std::right << std::setw(11) << "Precision"
      << std::setw(10) << "Recall" << std::setw(10) << "F1" << std::setw(10) << "Support" << '\n';
}

bool any_undefined(const EvalReport& r) {
  for (const auto& row : r.per_tag) {
    if (row.score.precision_undefined || row.score.recall_undefined) return true;
  }
  for (const auto& row : r.per_type) {
    for (const Score* s : {&row.token_weighted, &row.span}) {
      if (s->precision_undefined || s->recall_undefined) return true;
    }
  }
  return false;
}

}  // namespace

void write_eval_table(std::ostream& out, const EvalReport& r) {
  out << "Evaluation (" << r.mode << "), " << r.tokens << " tokens, accuracy "
      << fmt(r.accuracy(), false) << "\n\n";
  if (r.has_token_scores) {
    header(out, "Tagset");
    for (const auto& row : r.per_tag) score_line(out, row.tag.str(), row.score);
    out << "\nPer entity type, token level (support-weighted over B-/I-)\n";
    header(out, "Type");
    for (const auto& row : r.per_type) {
      score_line(out, std::string(entity_name(row.type)), row.token_weighted);
    }
    out << "\nPer entity type, token level (unweighted mean over B-/I-)\n";
    header(out, "Type");
    for (const auto& row : r.per_type) {
      score_line(out, std::string(entity_name(row.type)), row.token_unweighted);
    }
  }
  if (r.has_span_scores) {
    out << "\nPer entity type, exact span match\n";
    header(out, "Type");
    for (const auto& row : r.per_type) score_line(out, std::string(entity_name(row.type)), row.span);
  }
  out << "\nMacro over";
  for (EntityType t : r.macro.types) out << ' ' << entity_name(t);
  out << " (OTHER excluded)\n";
  if (r.has_token_scores) {
    out << "  token F1, support-weighted   " << fmt(r.macro.token_weighted_f1, false) << '\n';
    out << "  token F1, unweighted         " << fmt(r.macro.token_unweighted_f1, false) << '\n';
  }
  if (r.has_span_scores) {
    out << "  span F1                      " << fmt(r.macro.span_f1, false) << '\n';
    if (r.gold_orphans + r.predicted_orphans > 0) {
      out << "  orphan I- labels read as B-: gold " << r.gold_orphans << ", predicted "
          << r.predicted_orphans << '\n';
    }
  }
  if (any_undefined(r)) out << "\n* undefined (empty denominator), reported as 0\n";
}

void write_eval_tsv(std::ostream& out, const EvalReport& r) {
  auto put = [&out](const std::string& key, double v) { out << key << '\t' << v << '\n'; };
  auto put_score = [&](const std::string& prefix, const Score& s) {
    put(prefix + ".precision", s.precision);
    put(prefix + ".recall", s.recall);
    put(prefix + ".f1", s.f1);
    out << prefix << ".support\t" << s.support << '\n';
  };
  out << std::setprecision(17);
  out << "mode\t" << r.mode << '\n';
  out << "tokens\t" << r.tokens << '\n';
  put("accuracy", r.accuracy());
  if (r.has_token_scores) {
    for (const auto& row : r.per_tag) put_score("tag." + row.tag.str(), row.score);
    for (const auto& row : r.per_type) {
      std::string name(entity_name(row.type));
      put_score("type." + name + ".token_weighted", row.token_weighted);
      put_score("type." + name + ".token_unweighted", row.token_unweighted);
    }
    put("macro.token_weighted.f1", r.macro.token_weighted_f1);
    put("macro.token_unweighted.f1", r.macro.token_unweighted_f1);
  }
  if (r.has_span_scores) {
    for (const auto& row : r.per_type) {
      put_score("type." + std::string(entity_name(row.type)) + ".span", row.span);
    }
    put("macro.span.f1", r.macro.span_f1);
    out << "orphans.gold\t" << r.gold_orphans << '\n';
    out << "orphans.predicted\t" << r.predicted_orphans << '\n';
  }
  out << std::setprecision(6);
}

void write_error_dump(std::ostream& out, const std::vector<ErrorEntry>& errors) {
  for (const auto& e : errors) {
    out << e.sentence << '\t' << e.token << '\t' << e.surface << '\t' << e.gold.str() << '\t'
        << e.predicted.str() << '\t' << e.context << '\n';
  }
}

}  // namespace seqlab
