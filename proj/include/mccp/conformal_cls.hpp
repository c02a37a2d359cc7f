#pragma once

#include <vector>

#include "mccp/adaptive_mc.hpp"
#include "mccp/mlp.hpp"
#include "mccp/rng.hpp"
#include "mccp/types.hpp"

namespace mccp {

struct RapsParams {
  double lambda = 0.1;  // per-rank penalty weight beyond k_reg
  int k_reg = 5;        // deepest unpenalized rank
};

enum class ClsMethod { Naive, Raps };

// Fitted conformal classification state. The threshold is always
// empirical_quantile(scores, conformal_index(n, alpha)) and can be
// recomputed from the stored fields.
struct ClsCalibration {
  ClsMethod method = ClsMethod::Raps;
  double alpha = 0.05;
  RapsParams raps;
  double temperature = 1.0;
  std::vector<double> scores;
  double threshold = 0.0;
};

// Single-parameter temperature fit: minimizes the mean negative
// log-likelihood of softmax(logits / T) by golden-section search on
// [t_lo, t_hi] (default [0.05, 10], tolerance 1e-4). The returned T never has
// higher NLL than T = 1. Refuses calibration sets where only one class
// appears.
double fit_temperature(const std::vector<Vec>& logits,
                       const std::vector<int>& labels, double t_lo = 0.05,
                       double t_hi = 10.0, double tol = 1e-4);

// Nonconformity of the true class under a plain softmax reading: 1 - p[true].
double naive_score(const Vec& probs, int true_label);

// {y : probs[y] >= 1 - qhat}; an infinite qhat admits every class.
PredictionSet naive_set(const Vec& probs, double qhat);

// Cumulative-probability score with rank penalty: sort probabilities
// descending (ties by ascending class index), let k' be the 1-based rank of
// the true class, and return sum of the top k' probabilities plus
// lambda * max(0, k' - k_reg).
double raps_score(const Vec& probs, int true_label, const RapsParams& params);

// Exact dual of raps_score: the classes whose score (descending-order
// probability prefix through their rank, plus the rank penalty) stays within
// the threshold, i.e. the longest prefix of the descending order whose
// cumulative mass does not exceed it. Equality at the threshold keeps the
// class. The set is empty when even the top class overshoots, and contains
// every class under the infinite sentinel.
PredictionSet raps_set(const Vec& probs, double threshold,
                       const RapsParams& params);

// Scores every calibration sample with the chosen method and stores the
// finite-sample-corrected score quantile as the threshold.
ClsCalibration calibrate(ClsMethod method, const std::vector<Vec>& mean_probs,
                         const std::vector<int>& labels, double alpha,
                         const RapsParams& params = RapsParams{},
                         double temperature = 1.0);

struct ClsPrediction {
  PredictionSet set;
  Vec mean_probs;
  Vec variance;
  int passes = 0;
  bool converged = false;
};

// Full stochastic prediction path: adaptive Monte Carlo dropout over the
// logit predictor with the calibrated temperature applied to every pass
// before softmax; the mean probability vector feeds the configured set
// constructor.
ClsPrediction mc_cp_classify(const StochasticPredictor& logit_predictor,
                             const Vec& x, const AdaptiveConfig& cfg,
                             const ClsCalibration& calibration, Rng& rng);

}  // namespace mccp
