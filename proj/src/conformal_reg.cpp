#include "mccp/conformal_reg.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "mccp/quantile.hpp"

namespace mccp {

double cqr_score(const QuantilePair& pair, double y) {
  return std::max(pair.lo - y, y - pair.hi);
}

PredictionInterval cqr_interval(const QuantilePair& pair, double q) {
  PredictionInterval out;
  out.lo = pair.lo - q;
  out.hi = pair.hi + q;
  out.empty = out.lo > out.hi;
  return out;
}

RegCalibration calibrate_reg(const std::vector<QuantilePair>& pairs,
                             const std::vector<double>& ys, double alpha,
                             const QuantileLevels& levels) {
  if (pairs.empty()) {
    throw std::invalid_argument("calibrate_reg: empty calibration set");
  }
  if (pairs.size() != ys.size()) {
    throw std::invalid_argument(
        "calibrate_reg: predictions and observations differ in length");
  }
  RegCalibration cal;
  cal.alpha = alpha;
  cal.levels = levels;
  cal.scores.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cal.scores.push_back(cqr_score(pairs[i], ys[i]));
  }
  cal.q_correction = empirical_quantile(
      cal.scores, conformal_index(cal.scores.size(), alpha));
  return cal;
}

RegPrediction mc_cp_regress(const StochasticPredictor& quantile_predictor,
                            const Vec& x, const AdaptiveConfig& cfg,
                            const RegCalibration& calibration, Rng& rng) {
  if (quantile_predictor.output_dim() != 2) {
    throw std::invalid_argument(
        "mc_cp_regress: predictor must emit exactly two quantile outputs");
  }
  const AdaptiveResult mc = adaptive_mc_dropout(quantile_predictor, x, cfg, rng);
  RegPrediction pred;
  pred.mean_pair = QuantilePair{mc.mean[0], mc.mean[1]};
  pred.variance = mc.variance;
  pred.passes = static_cast<int>(mc.passes);
  pred.converged = mc.converged;
  pred.interval = cqr_interval(pred.mean_pair, calibration.q_correction);
  return pred;
}

}  // namespace mccp
