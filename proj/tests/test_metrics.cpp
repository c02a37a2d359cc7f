#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mccp/metrics.hpp"
#include "mccp/rng.hpp"

using namespace mccp;

namespace {

PredictionSet make_set(std::vector<int> classes) {
  PredictionSet s;
  std::sort(classes.begin(), classes.end());
  s.classes = std::move(classes);
  s.top_confidence = 0.5;
  return s;
}

// Independent counting oracle: index-by-index linear scan, no shared code
// with the library implementation.
double oracle_set_coverage(const std::vector<PredictionSet>& sets,
                           const std::vector<int>& truths) {
  int hits = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    bool found = false;
    for (int c : sets[i].classes) {
      if (c == truths[i]) found = true;
    }
    if (found) hits += 1;
  }
  return double(hits) / double(sets.size());
}

struct RandomFixture {
  std::vector<PredictionSet> sets;
  std::vector<int> truths;
};

RandomFixture random_fixture(Rng& rng, int num_classes) {
  RandomFixture fx;
  const std::size_t n = 1 + rng.next_below(60);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> classes;
    for (int c = 0; c < num_classes; ++c) {
      if (rng.next_double() < 0.35) classes.push_back(c);
    }
    fx.sets.push_back(make_set(classes));  // may be empty
    fx.truths.push_back(static_cast<int>(rng.next_below(num_classes)));
  }
  return fx;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("coverage: trivial endpoints and empty-set misses") {
  const std::vector<PredictionSet> all = {make_set({0}), make_set({1, 2})};
  CHECK(coverage(all, {0, 2}) == 1.0);
  CHECK(coverage(all, {1, 0}) == 0.0);
  CHECK(coverage(all, {0, 0}) == 0.5);
  // Empty set can never contain the truth.
  const std::vector<PredictionSet> with_empty = {make_set({}), make_set({1})};
  CHECK(coverage(with_empty, {0, 1}) == 0.5);
  CHECK_THROWS_AS(coverage(std::vector<PredictionSet>{}, std::vector<int>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(coverage(all, {0}), std::invalid_argument);
}

TEST_CASE("coverage: interval variant counts empties as misses") {
  PredictionInterval good{1.0, 3.0, false};
  PredictionInterval empty{4.0, 3.0, true};
  CHECK(coverage({good, empty}, {2.0, 3.5}) == 0.5);
  CHECK(coverage({good, good}, {1.0, 3.0}) == 1.0);  // closed ends
}

TEST_CASE("coverage and mean_size: brute-force oracle, 1000 randomized cases") {
  Rng rng(401);
  for (int rep = 0; rep < 1000; ++rep) {
    const int num_classes = 2 + static_cast<int>(rng.next_below(9));
    const RandomFixture fx = random_fixture(rng, num_classes);
    CHECK(coverage(fx.sets, fx.truths) ==
          oracle_set_coverage(fx.sets, fx.truths));

    // Oracle for mean size: plain sum of cardinalities.
    double total = 0.0;
    for (const auto& s : fx.sets) total += double(s.classes.size());
    const auto [mean, stddev] = mean_size(fx.sets);
    CHECK(mean == total / double(fx.sets.size()));
    double sq = 0.0;
    for (const auto& s : fx.sets) {
      const double d = double(s.classes.size()) - mean;
      sq += d * d;
    }
    CHECK(stddev == std::sqrt(sq / double(fx.sets.size())));
  }
}

TEST_CASE("mean_size: frozen examples") {
  const std::vector<PredictionSet> sets = {make_set({0}), make_set({0, 1}),
                                           make_set({0, 1, 2})};
  const auto [mean, stddev] = mean_size(sets);
  CHECK(mean == doctest::Approx(2.0));
  // Population stddev of [1,2,3].
  CHECK(stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));

  const std::vector<PredictionSet> singles = {make_set({2}), make_set({0})};
  const auto [m1, s1] = mean_size(singles);
  CHECK(m1 == 1.0);
  CHECK(s1 == 0.0);

  // Interval widths; the empty one contributes width zero.
  const std::vector<PredictionInterval> ivs = {
      PredictionInterval{0.0, 2.0, false}, PredictionInterval{5.0, 4.0, true}};
  const auto [mw, sw] = mean_size(ivs);
  CHECK(mw == doctest::Approx(1.0));
  CHECK(sw == doctest::Approx(1.0));
}

TEST_CASE("singleton_stats: frozen examples") {
  // [{a},{a,b}] with truths [a, b].
  const auto s1 =
      singleton_stats({make_set({0}), make_set({0, 1})}, {0, 1});
  CHECK(s1.singleton_fraction == 0.5);
  REQUIRE(s1.singleton_accuracy.has_value());
  CHECK(*s1.singleton_accuracy == 1.0);
  REQUIRE(s1.mixed_accuracy.has_value());
  CHECK(*s1.mixed_accuracy == 1.0);

  // [{a},{b,c}] with truths [b, a]: both conditional accuracies zero.
  const auto s2 =
      singleton_stats({make_set({0}), make_set({1, 2})}, {1, 0});
  CHECK(s2.singleton_fraction == 0.5);
  CHECK(*s2.singleton_accuracy == 0.0);
  CHECK(*s2.mixed_accuracy == 0.0);

  // All singletons, all correct: mixed accuracy is absent, not zero.
  const auto s3 = singleton_stats({make_set({1}), make_set({0})}, {1, 0});
  CHECK(s3.singleton_fraction == 1.0);
  CHECK(*s3.singleton_accuracy == 1.0);
  CHECK_FALSE(s3.mixed_accuracy.has_value());

  // No singletons at all: singleton accuracy absent.
  const auto s4 = singleton_stats({make_set({0, 1})}, {0});
  CHECK(s4.singleton_fraction == 0.0);
  CHECK_FALSE(s4.singleton_accuracy.has_value());

  // Empty sets group with mixed and always miss.
  const auto s5 = singleton_stats({make_set({}), make_set({0, 1})}, {0, 0});
  CHECK(s5.singleton_fraction == 0.0);
  CHECK(*s5.mixed_accuracy == 0.5);
}

TEST_CASE("mean_top_confidence: frozen examples") {
  const std::vector<Vec> uniform = {{0.25, 0.25, 0.25, 0.25},
                                    {0.25, 0.25, 0.25, 0.25}};
  CHECK(mean_top_confidence(uniform) == doctest::Approx(0.25));
  const std::vector<Vec> onehot = {{1.0, 0.0}, {0.0, 1.0}};
  CHECK(mean_top_confidence(onehot) == doctest::Approx(1.0));
  const std::vector<Vec> mixed = {{0.7, 0.3}, {0.4, 0.6}};
  CHECK(mean_top_confidence(mixed) == doctest::Approx((0.7 + 0.6) / 2.0));
}

TEST_CASE("regression_mae: frozen examples and empty handling") {
  const PredictionInterval centered{1.0, 3.0, false};
  CHECK(regression_mae({centered}, {2.0}, MaeMode::Midpoint).mae ==
        doctest::Approx(0.0));

  const PredictionInterval off{0.0, 2.0, false};
  CHECK(regression_mae({off}, {3.0}, MaeMode::Midpoint).mae ==
        doctest::Approx(2.0));
  CHECK(regression_mae({off}, {3.0}, MaeMode::PerQuantile).mae ==
        doctest::Approx(2.0));

  // Empty intervals are excluded and counted.
  const PredictionInterval gone{4.0, 3.0, true};
  const MaeResult r =
      regression_mae({off, gone}, {3.0, 1.0}, MaeMode::Midpoint);
  CHECK(r.mae == doctest::Approx(2.0));
  CHECK(r.excluded == 1);

  CHECK_THROWS_AS(regression_mae({gone}, {1.0}, MaeMode::Midpoint),
                  std::invalid_argument);
}

TEST_CASE("per_class_coverage: weighted mean equals overall coverage") {
  Rng rng(402);
  for (int rep = 0; rep < 200; ++rep) {
    const int num_classes = 2 + static_cast<int>(rng.next_below(6));
    const RandomFixture fx = random_fixture(rng, num_classes);
    const std::vector<double> per_class =
        per_class_coverage(fx.sets, fx.truths, num_classes);
    std::vector<double> freq(static_cast<std::size_t>(num_classes), 0.0);
    for (int y : fx.truths) freq[static_cast<std::size_t>(y)] += 1.0;
    double weighted = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      weighted += per_class[static_cast<std::size_t>(c)] *
                  freq[static_cast<std::size_t>(c)] /
                  double(fx.truths.size());
    }
    CHECK(std::abs(weighted - coverage(fx.sets, fx.truths)) <= 1e-12);
  }
}

TEST_CASE("per_class_coverage: absent classes report zero with zero weight") {
  const std::vector<PredictionSet> sets = {make_set({0}), make_set({0, 2})};
  const std::vector<int> truths = {0, 2};
  const auto pc = per_class_coverage(sets, truths, 4);
  REQUIRE(pc.size() == 4);
  CHECK(pc[0] == 1.0);
  CHECK(pc[1] == 0.0);  // never observed
  CHECK(pc[2] == 1.0);
  CHECK(pc[3] == 0.0);  // never observed
  CHECK_THROWS_AS(per_class_coverage(sets, {0, 9}, 4), std::invalid_argument);
}

TEST_CASE("classification_report: invariant test_error = 1 - coverage") {
  Rng rng(403);
  for (int rep = 0; rep < 100; ++rep) {
    const int num_classes = 3;
    RandomFixture fx = random_fixture(rng, num_classes);
    std::vector<Vec> probs(fx.sets.size(), Vec{0.5, 0.3, 0.2});
    std::vector<int> passes(fx.sets.size(), 11);
    const EvalReport rep_out = classification_report(
        fx.sets, fx.truths, probs, passes, num_classes);
    CHECK(rep_out.test_error == 1.0 - rep_out.coverage);  // bit-exact
    CHECK(rep_out.coverage >= 0.0);
    CHECK(rep_out.coverage <= 1.0);
    CHECK(rep_out.singleton_fraction >= 0.0);
    CHECK(rep_out.singleton_fraction <= 1.0);
    CHECK(rep_out.mean_passes == 11.0);
    std::int64_t empties = 0;
    for (const auto& s : fx.sets)
      if (s.classes.empty()) ++empties;
    CHECK(rep_out.empty_count == empties);
  }
}

TEST_CASE("regression_report: assembles widths, MAE and pass counts") {
  const std::vector<PredictionInterval> ivs = {
      PredictionInterval{0.0, 2.0, false}, PredictionInterval{1.0, 5.0, false},
      PredictionInterval{3.0, 2.0, true}};
  const std::vector<double> ys = {1.0, 0.0, 2.5};
  const std::vector<int> passes = {11, 21, 101};
  const EvalReport report =
      regression_report(ivs, ys, passes, MaeMode::Midpoint);
  CHECK(report.coverage == doctest::Approx(1.0 / 3.0));
  CHECK(report.test_error == 1.0 - report.coverage);
  CHECK(report.mean_size == doctest::Approx(2.0));  // widths 2, 4, 0
  CHECK(report.empty_count == 1);
  REQUIRE(report.mae.has_value());
  // Midpoints 1 and 3 vs truths 1 and 0; the empty interval is excluded.
  CHECK(*report.mae == doctest::Approx((0.0 + 3.0) / 2.0));
  CHECK(report.mean_passes == doctest::Approx((11.0 + 21.0 + 101.0) / 3.0));
  CHECK_FALSE(report.singleton_accuracy.has_value());
}

}  // TEST_SUITE
