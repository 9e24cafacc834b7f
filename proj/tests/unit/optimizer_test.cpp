#include <doctest.h>

#include <cmath>

#include "seqlab/eval.hpp"
#include "seqlab/optimizer.hpp"
#include "seqlab/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace seqlab;

TEST_CASE("minimize a quadratic") {
  // f(x) = sum_i (i+1) (x_i - 1)^2
  SmoothObjective f = [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double a = static_cast<double>(i + 1);
      v += a * (x[i] - 1) * (x[i] - 1);
      g[i] = 2 * a * (x[i] - 1);
    }
    return v;
  };
  LbfgsOptions opts;
  opts.tolerance = 1e-12;
  auto r = minimize(f, std::vector<double>(5, 0.0), opts);
  for (double v : r.x) CHECK(v == doctest::Approx(1.0).epsilon(1e-5));
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].objective <= r.log[i - 1].objective);
}

TEST_CASE("L1 drives weak coordinates to exactly zero") {
  // f(x) = (x0 - 3)^2 + (x1 - 0.1)^2, l1 = 1: optimum x0 = 2.5, x1 = 0.
  SmoothObjective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2 * (x[0] - 3);
    g[1] = 2 * (x[1] - 0.1);
    return (x[0] - 3) * (x[0] - 3) + (x[1] - 0.1) * (x[1] - 0.1);
  };
  LbfgsOptions opts;
  opts.l1 = 1.0;
  opts.tolerance = 1e-12;
  auto r = minimize(f, {0.0, 0.0}, opts);
  CHECK(r.x[0] == doctest::Approx(2.5).epsilon(1e-5));
  CHECK(r.x[1] == 0.0);
}

TEST_CASE("training on the toy corpus") {
  Corpus toy = testing::toy_corpus();
  TrainConfig cfg;
  auto plain = train_tagger(toy, ClusterMap{}, cfg);
  SUBCASE("memorizes the training set") {
    auto pred = tag_corpus(plain.model, ClusterMap{}, toy);
    auto report = evaluate(toy, pred);
    CHECK(report.accuracy() == 1.0);
    CHECK(report.macro.span_f1 == 1.0);
  }
  SUBCASE("objective log never increases") {
    REQUIRE(plain.log.size() >= 2);
    for (std::size_t i = 1; i < plain.log.size(); ++i) {
      CHECK(plain.log[i].objective <= plain.log[i - 1].objective);
    }
    CHECK(plain.log.size() <= 101);
  }
  SUBCASE("L1 sparsity") {
    TrainConfig l1 = cfg;
    l1.c1 = 0.5;
    auto sparse = train_tagger(toy, ClusterMap{}, l1);
    auto zeros = [](const CrfModel& m) {
      return std::count(m.weights().begin(), m.weights().end(), 0.0);
    };
    CHECK(zeros(sparse.model) > zeros(plain.model));
  }
  SUBCASE("heavy L2 shrinks everything") {
    TrainConfig l2 = cfg;
    l2.c2 = 1e6;
    auto shrunk = train_tagger(toy, ClusterMap{}, l2);
    double norm = 0.0;
    for (double v : shrunk.model.weights()) norm += v * v;
    CHECK(std::sqrt(norm) <= 1e-2);
  }
  SUBCASE("deterministic") {
    auto again = train_tagger(toy, ClusterMap{}, cfg);
    CHECK(std::equal(again.model.weights().begin(), again.model.weights().end(),
                     plain.model.weights().begin(), plain.model.weights().end()));
    TrainConfig threaded = cfg;
    threaded.threads = 3;
    auto t1 = train_tagger(toy, ClusterMap{}, threaded);
    auto t2 = train_tagger(toy, ClusterMap{}, threaded);
    CHECK(std::equal(t1.model.weights().begin(), t1.model.weights().end(),
                     t2.model.weights().begin(), t2.model.weights().end()));
  }
}
