#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

using LabelSequence = std::vector<BioLabel>;

struct Span {
  EntityType type = EntityType::kPer;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  auto operator<=>(const Span&) const = default;
};

struct SpanExtraction {
  std::vector<Span> spans;
  // Orphan I- labels that were treated as B-.
  std::size_t orphans = 0;
};

// Each maximal B-X (I-X)* run becomes a span. An orphan I-X opens a new
// span as if it were B-X.
SpanExtraction extract_spans(const LabelSequence& labels);

// Precision, recall and F1 with counts. An empty denominator gives 0 and
// sets the matching *_undefined flag.
struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

Score score_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct TagRow {
  BioLabel tag;
  Score score;
};

struct TypeRow {
  EntityType type = EntityType::kPer;
  // Token level: B-X and I-X rows averaged with weights equal to support.
  Score token_weighted;
  // Token level: plain mean of the B-X and I-X rows that exist.
  Score token_unweighted;
  // Exact (type, start, end) span matching.
  Score span;
};

// Means over PER, ORG and LOC with gold support; OTHER is excluded.
struct MacroScores {
  double token_weighted_precision = 0.0;
  double token_weighted_recall = 0.0;
  double token_weighted_f1 = 0.0;
  double token_unweighted_f1 = 0.0;
  double span_precision = 0.0;
  double span_recall = 0.0;
  double span_f1 = 0.0;
  std::vector<EntityType> types;  // the types averaged over
};

struct ErrorEntry {
  std::size_t sentence = 0;
  std::size_t token = 0;
  std::string surface;
  BioLabel gold;
  BioLabel predicted;
  std::string context;  // up to two tokens either side, target in brackets
};

struct EvalReport {
  std::string mode = "in-language";
  std::size_t tokens = 0;
  std::size_t correct = 0;
  // Every non-O tag seen in gold or prediction, canonical order.
  std::vector<TagRow> per_tag;
  // Every entity type seen in gold or prediction.
  std::vector<TypeRow> per_type;
  MacroScores macro;
  std::size_t gold_orphans = 0;
  std::size_t predicted_orphans = 0;
  bool has_token_scores = false;
  bool has_span_scores = false;

  double accuracy() const {
    return tokens == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(tokens);
  }
  const TagRow* tag(BioLabel label) const;
  const TypeRow* type(EntityType t) const;
};

// Throws AlignmentError unless pred has the gold corpus' shape.
void check_shape(const Corpus& gold, const std::vector<LabelSequence>& pred);

// Per-tag token-level scores and the token columns of per_type/macro.
EvalReport token_report(const Corpus& gold, const std::vector<LabelSequence>& pred);

// Span columns of per_type/macro.
EvalReport span_report(const Corpus& gold, const std::vector<LabelSequence>& pred);

// token_report and span_report merged into one report.
EvalReport evaluate(const Corpus& gold, const std::vector<LabelSequence>& pred);

std::vector<ErrorEntry> error_dump(const Corpus& gold, const std::vector<LabelSequence>& pred);

// Aligned tables in the Precision / Recall / F1 / Support layout.
void write_eval_table(std::ostream& out, const EvalReport& report);
// "key<TAB>value" lines.
void write_eval_tsv(std::ostream& out, const EvalReport& report);
// sentence<TAB>token<TAB>surface<TAB>gold<TAB>predicted<TAB>context
void write_error_dump(std::ostream& out, const std::vector<ErrorEntry>& errors);

}  // namespace seqlab
