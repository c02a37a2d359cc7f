#pragma once

#include <vector>

#include "mccp/adaptive_mc.hpp"
#include "mccp/mlp.hpp"
#include "mccp/types.hpp"

namespace mccp {

// Calibration state for conformalized quantile regression.
struct RegCalibration {
  double alpha = 0.1;
  QuantileLevels levels;
  std::vector<double> scores;   // conformity scores on the calibration split
  double q_correction = 0.0;    // additive interval correction (may be < 0)
};

// Conformity score of a raw quantile pair against the observed value:
// max(lo - y, y - hi). Negative when y sits strictly inside the raw band,
// zero exactly on either edge, positive outside.
double cqr_score(const QuantilePair& pair, double y);

// Conformalized interval [lo - q, hi + q]. A negative correction narrows the
// band and may empty it (lower end above upper end), which is recorded via
// the empty flag rather than clamped away.
PredictionInterval cqr_interval(const QuantilePair& pair, double q);

// Fits the correction on a calibration split: scores every pair against its
// observed value and takes the conformal quantile at miscoverage alpha.
RegCalibration calibrate_reg(const std::vector<QuantilePair>& pairs,
                             const std::vector<double>& ys, double alpha,
                             const QuantileLevels& levels = QuantileLevels{});

struct RegPrediction {
  PredictionInterval interval;
  QuantilePair mean_pair{0.0, 0.0};  // MC mean of the raw quantile outputs
  Vec variance;                      // per-output MC variance
  int passes = 0;
  bool converged = false;
};

// Full pipeline for one sample: adaptive MC dropout over the two-output
// quantile net, then the calibrated correction applied to the mean pair.
RegPrediction mc_cp_regress(const StochasticPredictor& quantile_predictor,
                            const Vec& x, const AdaptiveConfig& cfg,
                            const RegCalibration& calibration, Rng& rng);

}  // namespace mccp
