#pragma once

#include <cstddef>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

// Two annotators' labels for the same token stream.
struct AnnotationPair {
  std::vector<BioLabel> labels_a;
  std::vector<BioLabel> labels_b;
};

// Flattens two corpora over the same tokens. Sentence shapes and token
// surfaces must match position by position.
AnnotationPair align_annotations(const Corpus& a, const Corpus& b);

struct AgreementReport {
  double observed = 0.0;
  double chance = 0.0;
  double kappa = 0.0;  // NaN when chance == 1
  std::size_t total = 0;
  // Union of categories used by either annotator, canonical order.
  std::vector<BioLabel> categories;
  // confusion[i][j]: annotator A chose categories[i], B chose categories[j].
  std::vector<std::vector<std::size_t>> confusion;
};

// Thrown when chance agreement is 1. The report still carries the observed
// and chance values.
class UndefinedKappaError : public DataError {
 public:
  explicit UndefinedKappaError(AgreementReport report);
  const AgreementReport& report() const { return report_; }

 private:
  AgreementReport report_;
};

double observed_agreement(const AnnotationPair& pair);
double chance_agreement(const AnnotationPair& pair);

// Agreement is per token over full BIO labels, so B-PER against I-PER counts
// as a disagreement.
AgreementReport cohens_kappa(const AnnotationPair& pair);

// Recomputes every scalar from an existing confusion matrix.
AgreementReport kappa_from_confusion(std::vector<BioLabel> categories,
                                     std::vector<std::vector<std::size_t>> confusion);

// (observed - chance) / (1 - chance)
double kappa_from_rates(double observed, double chance);

void write_agreement_table(std::ostream& out, const AgreementReport& report);
void write_agreement_tsv(std::ostream& out, const AgreementReport& report);

}  // namespace seqlab
