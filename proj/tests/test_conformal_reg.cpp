#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mccp/conformal_reg.hpp"
#include "mccp/rng.hpp"

using namespace mccp;

TEST_SUITE("conformal_reg") {

TEST_CASE("cqr score: frozen examples") {
  const QuantilePair pair{2.0, 5.0};
  CHECK(cqr_score(pair, 6.0) == doctest::Approx(1.0));
  CHECK(cqr_score(pair, 3.0) == doctest::Approx(-1.0));
  CHECK(cqr_score(pair, 5.0) == 0.0);  // exactly on the upper edge
  CHECK(cqr_score(pair, 2.0) == 0.0);  // exactly on the lower edge
  // Crossed raw pair is legal input; the score still reads distance-to-band.
  const QuantilePair crossed{5.0, 2.0};
  CHECK(cqr_score(crossed, 3.5) == doctest::Approx(1.5));
}

TEST_CASE("cqr interval: frozen examples") {
  const QuantilePair pair{2.0, 5.0};
  const PredictionInterval widened = cqr_interval(pair, 1.0);
  CHECK(widened.lo == doctest::Approx(1.0));
  CHECK(widened.hi == doctest::Approx(6.0));
  CHECK_FALSE(widened.empty);
  CHECK(widened.width() == doctest::Approx(5.0));

  const PredictionInterval narrowed = cqr_interval(pair, -0.5);
  CHECK(narrowed.lo == doctest::Approx(2.5));
  CHECK(narrowed.hi == doctest::Approx(4.5));
  CHECK_FALSE(narrowed.empty);

  // Over-narrowing empties the interval: flagged, zero width, contains
  // nothing, never clamped.
  const PredictionInterval gone = cqr_interval(pair, -2.0);
  CHECK(gone.empty);
  CHECK(gone.width() == 0.0);
  CHECK_FALSE(gone.contains(3.5));
  CHECK(gone.lo == doctest::Approx(4.0));
  CHECK(gone.hi == doctest::Approx(3.0));
}

TEST_CASE("cqr interval width: raw width plus twice the correction") {
  Rng rng(301);
  for (int rep = 0; rep < 200; ++rep) {
    const double lo = rng.next_uniform(-5.0, 5.0);
    const QuantilePair pair{lo, lo + rng.next_uniform(0.0, 4.0)};
    const double q = rng.next_uniform(-0.1, 2.0);
    const PredictionInterval iv = cqr_interval(pair, q);
    if (!iv.empty) {
      CHECK(iv.width() ==
            doctest::Approx((pair.hi - pair.lo) + 2.0 * q).epsilon(1e-12));
    }
  }
}

TEST_CASE("cqr interval: monotone in the correction") {
  Rng rng(302);
  for (int rep = 0; rep < 200; ++rep) {
    const double lo = rng.next_uniform(-5.0, 5.0);
    const QuantilePair pair{lo, lo + rng.next_uniform(0.0, 3.0)};
    const double q1 = rng.next_uniform(-3.0, 2.0);
    const double q2 = q1 + rng.next_uniform(0.0, 2.0);
    const PredictionInterval a = cqr_interval(pair, q1);
    const PredictionInterval b = cqr_interval(pair, q2);
    // Everything the smaller correction contains, the larger one does too.
    for (int i = 0; i < 20; ++i) {
      const double y = rng.next_uniform(-10.0, 10.0);
      if (a.contains(y)) CHECK(b.contains(y));
    }
  }
}

TEST_CASE("cqr duality is exact: inside the interval iff score <= correction") {
  Rng rng(303);
  for (int rep = 0; rep < 500; ++rep) {
    const double lo = rng.next_uniform(-5.0, 5.0);
    const QuantilePair pair{lo, lo + rng.next_uniform(-1.0, 4.0)};
    const double q = rng.next_uniform(-2.0, 2.0);
    const PredictionInterval iv = cqr_interval(pair, q);
    for (int i = 0; i < 10; ++i) {
      const double y = rng.next_uniform(-12.0, 12.0);
      CHECK(iv.contains(y) == (cqr_score(pair, y) <= q));
    }
    // Boundary points, bit-exact.
    if (!iv.empty) {
      CHECK(iv.contains(iv.lo));
      CHECK(iv.contains(iv.hi));
      CHECK(cqr_score(pair, iv.lo) <= q + 1e-12);
      CHECK(cqr_score(pair, iv.hi) <= q + 1e-12);
    }
  }
}

TEST_CASE("calibrate_reg: frozen example") {
  // One fixed raw band, observations placed to yield scores -1, 0, 1, 2.
  const std::vector<QuantilePair> pairs(4, QuantilePair{2.0, 5.0});
  const std::vector<double> ys = {3.0, 5.0, 6.0, 7.0};
  const RegCalibration cal = calibrate_reg(pairs, ys, 0.5);
  REQUIRE(cal.scores.size() == 4);
  CHECK(cal.scores[0] == doctest::Approx(-1.0));
  CHECK(cal.scores[1] == doctest::Approx(0.0));
  CHECK(cal.scores[2] == doctest::Approx(1.0));
  CHECK(cal.scores[3] == doctest::Approx(2.0));
  // n = 4, alpha = 0.5: rank ceil(5 * 0.5) = 3, third smallest score.
  CHECK(cal.q_correction == doctest::Approx(1.0));
}

TEST_CASE("calibrate_reg: over-covering predictor yields a negative correction") {
  // Raw bands comfortably contain every observation, so all scores are
  // negative and the conformal correction legitimately narrows the band.
  Rng rng(304);
  std::vector<QuantilePair> pairs;
  std::vector<double> ys;
  for (int i = 0; i < 200; ++i) {
    const double y = rng.next_uniform(-1.0, 1.0);
    pairs.push_back(QuantilePair{y - rng.next_uniform(0.5, 1.0),
                                 y + rng.next_uniform(0.5, 1.0)});
    ys.push_back(y);
  }
  const RegCalibration cal = calibrate_reg(pairs, ys, 0.1);
  CHECK(cal.q_correction < 0.0);
  const PredictionInterval iv = cqr_interval(QuantilePair{0.0, 2.0},
                                             cal.q_correction);
  CHECK(iv.width() < 2.0);
  CHECK_FALSE(iv.empty);
}

TEST_CASE("calibrate_reg: rank beyond the sample yields the infinite band") {
  const RegCalibration cal =
      calibrate_reg({QuantilePair{0.0, 1.0}}, {0.5}, 0.1);
  CHECK(std::isinf(cal.q_correction));
  const PredictionInterval iv =
      cqr_interval(QuantilePair{3.0, 4.0}, cal.q_correction);
  CHECK_FALSE(iv.empty);
  CHECK(iv.contains(1e100));
  CHECK(iv.contains(-1e100));
}

TEST_CASE("calibrate_reg: input validation") {
  CHECK_THROWS_AS(calibrate_reg({}, {}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(
      calibrate_reg({QuantilePair{0.0, 1.0}}, {0.5, 0.7}, 0.1),
      std::invalid_argument);
}

TEST_CASE("mc_cp_regress: deterministic predictor reduces to plain CQR") {
  MlpSpec spec{{3, 16, 2}, 0.0, Head::Identity};
  Rng init(81);
  Mlp net = init_mlp(spec, init);
  MlpPredictor predictor(&net);

  RegCalibration cal;
  cal.alpha = 0.1;
  cal.q_correction = 0.4;

  AdaptiveConfig cfg;
  cfg.max_passes = 100;
  cfg.delta = 5e-4;
  cfg.patience = 10;

  const Vec x = {0.3, -1.2, 0.7};
  Rng rng(17);
  const RegPrediction pred = mc_cp_regress(predictor, x, cfg, cal, rng);

  CHECK(pred.passes == 11);
  CHECK(pred.converged);
  Vec det;
  predictor.predict_deterministic(x, det);
  CHECK(pred.mean_pair.lo == doctest::Approx(det[0]));
  CHECK(pred.mean_pair.hi == doctest::Approx(det[1]));
  const PredictionInterval direct =
      cqr_interval(QuantilePair{det[0], det[1]}, cal.q_correction);
  CHECK(pred.interval.lo == doctest::Approx(direct.lo));
  CHECK(pred.interval.hi == doctest::Approx(direct.hi));
  CHECK(pred.interval.empty == direct.empty);
}

TEST_CASE("mc_cp_regress: never-converging run equals the K-pass mean band") {
  MlpSpec spec{{2, 24, 2}, 0.25, Head::Identity};
  Rng init(82);
  Mlp net = init_mlp(spec, init);
  MlpPredictor predictor(&net);

  RegCalibration cal;
  cal.q_correction = -0.05;

  AdaptiveConfig cfg;
  cfg.max_passes = 40;
  cfg.delta = 0.0;  // unattainable on stochastic outputs
  cfg.patience = 5;

  const Vec x = {0.9, 0.1};
  Rng r1(55), r2(55);
  const RegPrediction pred = mc_cp_regress(predictor, x, cfg, cal, r1);
  const AdaptiveResult batch = batch_mc_dropout(predictor, x, 40, r2);

  CHECK(pred.passes == 40);
  CHECK_FALSE(pred.converged);
  CHECK(pred.mean_pair.lo == batch.mean[0]);
  CHECK(pred.mean_pair.hi == batch.mean[1]);
  CHECK(pred.variance == batch.variance);
  const PredictionInterval direct =
      cqr_interval(QuantilePair{batch.mean[0], batch.mean[1]},
                   cal.q_correction);
  CHECK(pred.interval.lo == direct.lo);
  CHECK(pred.interval.hi == direct.hi);
}

TEST_CASE("mc_cp_regress: rejects predictors without a two-output head") {
  MlpSpec spec{{2, 8, 3}, 0.1, Head::Identity};
  Rng init(83);
  Mlp net = init_mlp(spec, init);
  MlpPredictor predictor(&net);
  RegCalibration cal;
  AdaptiveConfig cfg;
  Rng rng(1);
  CHECK_THROWS_AS(mc_cp_regress(predictor, {0.1, 0.2}, cfg, cal, rng),
                  std::invalid_argument);
}

}  // TEST_SUITE
