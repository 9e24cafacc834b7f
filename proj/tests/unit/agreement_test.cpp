#include <doctest.h>

#include <cmath>
#include <sstream>

#include "seqlab/agreement.hpp"
#include "seqlab/random.hpp"
#include "support/fixtures.hpp"

using namespace seqlab;

namespace {

std::vector<BioLabel> L(std::initializer_list<const char*> xs) {
  std::vector<BioLabel> out;
  for (const char* x : xs) out.push_back(*BioLabel::parse(x));
  return out;
}

}  // namespace

TEST_CASE("observed agreement") {
  CHECK(observed_agreement({L({"O", "B-PER"}), L({"O", "B-PER"})}) == 1.0);
  CHECK(observed_agreement({L({"O", "B-PER"}), L({"O", "O"})}) == 0.5);
  // Full BIO labels: a prefix mismatch is a disagreement.
  CHECK(observed_agreement({L({"B-PER"}), L({"I-PER"})}) == 0.0);
  CHECK_THROWS_AS(observed_agreement({L({"O"}), L({"O", "O"})}), AlignmentError);
}

TEST_CASE("chance agreement") {
  CHECK(chance_agreement({L({"O", "B-PER"}), L({"B-PER", "O"})}) == doctest::Approx(0.5));
  CHECK(chance_agreement({L({"O", "O"}), L({"O", "O"})}) == 1.0);
}

TEST_CASE("kappa from rates") {
  CHECK(std::abs(kappa_from_rates(0.9837, 0.7617) - 0.9315) <= 1e-4);
  CHECK(std::isnan(kappa_from_rates(1.0, 1.0)));
}

TEST_CASE("cohens_kappa") {
  SUBCASE("identical non-constant annotations") {
    auto r = cohens_kappa({L({"O", "B-PER", "I-PER", "B-LOC"}), L({"O", "B-PER", "I-PER", "B-LOC"})});
    CHECK(r.kappa == doctest::Approx(1.0));
    CHECK(r.categories.size() == 4);
  }
  SUBCASE("single category is undefined") {
    try {
      cohens_kappa({L({"O", "O", "O"}), L({"O", "O", "O"})});
      FAIL("expected UndefinedKappaError");
    } catch (const UndefinedKappaError& e) {
      CHECK(e.report().observed == 1.0);
      CHECK(e.report().chance == 1.0);
    }
  }
  SUBCASE("hand example") {
    // A: O O B-PER B-PER ; B: O B-PER B-PER O. p_o = 1/2, p_e = 1/2.
    auto r = cohens_kappa({L({"O", "O", "B-PER", "B-PER"}), L({"O", "B-PER", "B-PER", "O"})});
    CHECK(r.observed == doctest::Approx(0.5));
    CHECK(r.chance == doctest::Approx(0.5));
    CHECK(r.kappa == doctest::Approx(0.0));
    REQUIRE(r.confusion.size() == 2);
    CHECK(r.confusion[0][0] == 1);
    CHECK(r.confusion[0][1] == 1);
    CHECK(r.confusion[1][0] == 1);
    CHECK(r.confusion[1][1] == 1);
  }
}

TEST_CASE("kappa near zero for independent random annotators") {
  Rng rng(2024);
  AnnotationPair p;
  const std::vector<BioLabel> cats = L({"O", "B-PER", "B-ORG", "B-LOC"});
  for (int i = 0; i < 10000; ++i) {
    p.labels_a.push_back(cats[rng.index(4)]);
    p.labels_b.push_back(cats[rng.index(4)]);
  }
  CHECK(std::abs(cohens_kappa(p).kappa) < 0.05);
}

TEST_CASE("kappa properties on random annotations") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    AnnotationPair p;
    std::size_t n = 2 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) {
      p.labels_a.push_back(BioLabel::from_index(static_cast<int>(rng.index(5))));
      p.labels_b.push_back(rng.uniform() < 0.6 ? p.labels_a.back()
                                               : BioLabel::from_index(static_cast<int>(rng.index(5))));
    }
    AgreementReport r;
    try {
      r = cohens_kappa(p);
    } catch (const UndefinedKappaError&) {
      continue;
    }
    // Symmetry.
    AgreementReport swapped = cohens_kappa({p.labels_b, p.labels_a});
    CHECK(swapped.kappa == doctest::Approx(r.kappa).epsilon(1e-12));
    // Token order does not matter.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    AnnotationPair q;
    for (auto i : order) {
      q.labels_a.push_back(p.labels_a[i]);
      q.labels_b.push_back(p.labels_b[i]);
    }
    CHECK(cohens_kappa(q).kappa == doctest::Approx(r.kappa).epsilon(1e-12));
    // Recomputing from the confusion matrix gives the same scalars.
    AgreementReport again = kappa_from_confusion(r.categories, r.confusion);
    CHECK(again.observed == doctest::Approx(r.observed).epsilon(1e-12));
    CHECK(again.chance == doctest::Approx(r.chance).epsilon(1e-12));
    CHECK(again.kappa == doctest::Approx(r.kappa).epsilon(1e-12));
    CHECK(r.kappa <= 1.0 + 1e-12);
    std::size_t total = 0;
    for (const auto& row : r.confusion) {
      for (auto c : row) total += c;
    }
    CHECK(total == n);
  }
}

TEST_CASE("align_annotations") {
  Corpus a = testing::toy_corpus();
  Corpus b = a;
  auto pair = align_annotations(a, b);
  CHECK(pair.labels_a.size() == a.token_count());
  b.sentences[2].tokens[1] = "Different";
  CHECK_THROWS_AS(align_annotations(a, b), AlignmentError);
  Corpus c = a;
  c.sentences.pop_back();
  CHECK_THROWS_AS(align_annotations(a, c), AlignmentError);
}
