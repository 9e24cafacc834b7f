#include "seqlab/agreement.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace seqlab {
namespace {

void check_aligned(const AnnotationPair& pair) {
  if (pair.labels_a.size() != pair.labels_b.size()) {
    throw AlignmentError("annotation lengths differ: " + std::to_string(pair.labels_a.size()) +
                         " vs " + std::to_string(pair.labels_b.size()));
  }
  if (pair.labels_a.empty()) throw AlignmentError("annotations are empty");
}

using Counts = std::array<std::size_t, BioLabel::kCount>;

}  // namespace

AnnotationPair align_annotations(const Corpus& a, const Corpus& b) {
  if (a.sentences.size() != b.sentences.size()) {
    throw AlignmentError("sentence counts differ: " + std::to_string(a.sentences.size()) +
                         " vs " + std::to_string(b.sentences.size()));
  }
  AnnotationPair pair;
  for (std::size_t si = 0; si < a.sentences.size(); ++si) {
    const auto& sa = a.sentences[si];
    const auto& sb = b.sentences[si];
    if (sa.size() != sb.size()) {
      throw AlignmentError("sentence " + std::to_string(si) + " lengths differ");
    }
    for (std::size_t ti = 0; ti < sa.size(); ++ti) {
      if (sa.tokens[ti] != sb.tokens[ti]) {
        std::ostringstream msg;
        msg << "token mismatch at sentence " << si << ", token " << ti << ": '"
            << sa.tokens[ti] << "' vs '" << sb.tokens[ti] << "'";
        throw AlignmentError(msg.str());
      }
    }
    pair.labels_a.insert(pair.labels_a.end(), sa.labels.begin(), sa.labels.end());
    pair.labels_b.insert(pair.labels_b.end(), sb.labels.begin(), sb.labels.end());
  }
  return pair;
}

double observed_agreement(const AnnotationPair& pair) {
  check_aligned(pair);
  std::size_t same = 0;
  for (std::size_t i = 0; i < pair.labels_a.size(); ++i) {
    same += pair.labels_a[i] == pair.labels_b[i];
  }
  return static_cast<double>(same) / static_cast<double>(pair.labels_a.size());
}

double chance_agreement(const AnnotationPair& pair) {
  check_aligned(pair);
  Counts ca{}, cb{};
  for (BioLabel l : pair.labels_a) ++ca[l.index()];
  for (BioLabel l : pair.labels_b) ++cb[l.index()];
  const double n = static_cast<double>(pair.labels_a.size());
  double pe = 0.0;
  for (int c = 0; c < BioLabel::kCount; ++c) {
    pe += (static_cast<double>(ca[c]) / n) * (static_cast<double>(cb[c]) / n);
  }
  return pe;
}

double kappa_from_rates(double observed, double chance) {
  if (chance >= 1.0) return std::numeric_limits<double>::quiet_NaN();
  return (observed - chance) / (1.0 - chance);
}

AgreementReport kappa_from_confusion(std::vector<BioLabel> categories,
                                     std::vector<std::vector<std::size_t>> confusion) {
  const std::size_t k = categories.size();
  if (confusion.size() != k) throw AlignmentError("confusion matrix shape mismatch");
  AgreementReport r;
  std::vector<std::size_t> row(k, 0), col(k, 0);
  std::size_t diag = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw AlignmentError("confusion matrix shape mismatch");
    for (std::size_t j = 0; j < k; ++j) {
      row[i] += confusion[i][j];
      col[j] += confusion[i][j];
      r.total += confusion[i][j];
    }
    diag += confusion[i][i];
  }
  if (r.total == 0) throw AlignmentError("annotations are empty");
  const double n = static_cast<double>(r.total);
  r.observed = static_cast<double>(diag) / n;
  for (std::size_t c = 0; c < k; ++c) {
    r.chance += (static_cast<double>(row[c]) / n) * (static_cast<double>(col[c]) / n);
  }
  r.kappa = kappa_from_rates(r.observed, r.chance);
  r.categories = std::move(categories);
  r.confusion = std::move(confusion);
  if (r.chance >= 1.0) throw UndefinedKappaError(r);
  return r;
}

AgreementReport cohens_kappa(const AnnotationPair& pair) {
  check_aligned(pair);
  std::array<std::array<std::size_t, BioLabel::kCount>, BioLabel::kCount> full{};
  Counts used{};
  for (std::size_t i = 0; i < pair.labels_a.size(); ++i) {
    int a = pair.labels_a[i].index();
    int b = pair.labels_b[i].index();
    ++full[a][b];
    ++used[a];
    ++used[b];
  }
  std::vector<int> present;
  std::vector<BioLabel> categories;
  for (int c = 0; c < BioLabel::kCount; ++c) {
    if (used[c] > 0) {
      present.push_back(c);
      categories.push_back(BioLabel::from_index(c));
    }
  }
  std::vector<std::vector<std::size_t>> confusion(present.size(),
                                                  std::vector<std::size_t>(present.size()));
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = 0; j < present.size(); ++j) confusion[i][j] = full[present[i]][present[j]];
  }
  return kappa_from_confusion(std::move(categories), std::move(confusion));
}

UndefinedKappaError::UndefinedKappaError(AgreementReport report)
    : DataError("Cohen's kappa is undefined: chance agreement is 1 (observed " +
                std::to_string(report.observed) + ")"),
      report_(std::move(report)) {}

void write_agreement_table(std::ostream& out, const AgreementReport& r) {
  out << std::fixed << std::setprecision(4);
  out << "Observed Agreement    " << r.observed << '\n';
  out << "Agreement by Chance   " << r.chance << '\n';
  out << "Cohen's kappa         " << r.kappa << '\n';
  out << "Tokens                " << r.total << "\n\n";
  out << std::setw(10) << "A \\ B";
  for (BioLabel c : r.categories) out << std::setw(10) << c.str();
  out << '\n';
  for (std::size_t i = 0; i < r.categories.size(); ++i) {
    out << std::setw(10) << r.categories[i].str();
    for (std::size_t n : r.confusion[i]) out << std::setw(10) << n;
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

void write_agreement_tsv(std::ostream& out, const AgreementReport& r) {
  out << std::setprecision(17);
  out << "observed\t" << r.observed << '\n';
  out << "chance\t" << r.chance << '\n';
  out << "kappa\t" << r.kappa << '\n';
  out << "tokens\t" << r.total << '\n';
  for (std::size_t i = 0; i < r.categories.size(); ++i) {
    for (std::size_t j = 0; j < r.categories.size(); ++j) {
      out << "confusion\t" << r.categories[i].str() << '\t' << r.categories[j].str() << '\t'
          << r.confusion[i][j] << '\n';
    }
  }
  out << std::setprecision(6);
}

}  // namespace seqlab
