#include "mccp/conformal_cls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mccp/quantile.hpp"

namespace mccp {

namespace {

// Class indices ordered by descending probability, ties by ascending index.
std::vector<int> descending_order(const Vec& probs) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
  });
  return order;
}

void require_label(const Vec& probs, int label, const char* who) {
  if (label < 0 || label >= static_cast<int>(probs.size())) {
    throw std::invalid_argument(std::string(who) + ": label out of range");
  }
}

}  // namespace

double fit_temperature(const std::vector<Vec>& logits,
                       const std::vector<int>& labels, double t_lo,
                       double t_hi, double tol) {
  if (logits.empty() || logits.size() != labels.size()) {
    throw std::invalid_argument("fit_temperature: empty or mismatched inputs");
  }
  const int first = labels.front();
  const bool single_class =
      std::all_of(labels.begin(), labels.end(), [&](int y) { return y == first; });
  if (single_class) {
    throw std::invalid_argument(
        "fit_temperature: calibration labels contain a single class; "
        "temperature is not identifiable");
  }
  for (const Vec& l : logits) {
    for (double v : l) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("fit_temperature: non-finite logit");
      }
    }
  }

  auto nll = [&](double t) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const Vec& z = logits[i];
      double maxv = z[0];
      for (double v : z) maxv = std::max(maxv, v);
      double sum = 0.0;
      for (double v : z) sum += std::exp((v - maxv) / t);
      const double zy = z[static_cast<std::size_t>(labels[i])];
      total += std::log(sum) - (zy - maxv) / t;
    }
    return total / static_cast<double>(logits.size());
  };

  // Golden-section search; the NLL is unimodal in T (convex in 1/T).
  const double inv_phi = 0.6180339887498949;
  double a = t_lo, b = t_hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = nll(c), fd = nll(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = nll(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = nll(d);
    }
  }
  const double t_star = 0.5 * (a + b);
  // The search interval contains T = 1; keep the guarantee explicit anyway.
  return nll(t_star) <= nll(1.0) ? t_star : 1.0;
}

double naive_score(const Vec& probs, int true_label) {
  require_label(probs, true_label, "naive_score");
  return 1.0 - probs[static_cast<std::size_t>(true_label)];
}

PredictionSet naive_set(const Vec& probs, double qhat) {
  PredictionSet set;
  set.top_confidence = *std::max_element(probs.begin(), probs.end());
  const double cutoff = 1.0 - qhat;  // -inf when qhat is the sentinel
  for (int y = 0; y < static_cast<int>(probs.size()); ++y) {
    if (probs[static_cast<std::size_t>(y)] >= cutoff) set.classes.push_back(y);
  }
  return set;
}

double raps_score(const Vec& probs, int true_label, const RapsParams& params) {
  require_label(probs, true_label, "raps_score");
  const std::vector<int> order = descending_order(probs);
  double cumulative = 0.0;
  int rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cumulative += probs[static_cast<std::size_t>(order[i])];
    if (order[i] == true_label) {
      rank = static_cast<int>(i) + 1;
      break;
    }
  }
  const double penalty =
      params.lambda * std::max(0, rank - params.k_reg);
  return cumulative + penalty;
}

PredictionSet raps_set(const Vec& probs, double threshold,
                       const RapsParams& params) {
  PredictionSet set;
  set.top_confidence = *std::max_element(probs.begin(), probs.end());
  const std::vector<int> order = descending_order(probs);
  if (std::isinf(threshold)) {
    set.classes = order;
    std::sort(set.classes.begin(), set.classes.end());
    return set;
  }
  // Ranks are kept while their raps_score stays within the threshold, so
  // membership is exactly score <= threshold. The per-rank score below is
  // computed with the same expression as raps_score, making the duality
  // bit-exact.
  double prob_sum = 0.0;
  std::size_t k_star = order.size();  // every rank fits: keep every class
  for (std::size_t i = 0; i < order.size(); ++i) {
    prob_sum += probs[static_cast<std::size_t>(order[i])];
    const int rank = static_cast<int>(i) + 1;
    const double score =
        prob_sum + params.lambda * std::max(0, rank - params.k_reg);
    if (score > threshold) {
      k_star = i;
      break;
    }
  }
  set.classes.assign(order.begin(),
                     order.begin() + static_cast<std::ptrdiff_t>(k_star));
  std::sort(set.classes.begin(), set.classes.end());
  return set;
}

ClsCalibration calibrate(ClsMethod method, const std::vector<Vec>& mean_probs,
                         const std::vector<int>& labels, double alpha,
                         const RapsParams& params, double temperature) {
  if (mean_probs.empty() || mean_probs.size() != labels.size()) {
    throw std::invalid_argument("calibrate: empty or mismatched calibration set");
  }
  ClsCalibration cal;
  cal.method = method;
  cal.alpha = alpha;
  cal.raps = params;
  cal.temperature = temperature;
  cal.scores.reserve(mean_probs.size());
  for (std::size_t i = 0; i < mean_probs.size(); ++i) {
    cal.scores.push_back(method == ClsMethod::Naive
                             ? naive_score(mean_probs[i], labels[i])
                             : raps_score(mean_probs[i], labels[i], params));
  }
  cal.threshold = empirical_quantile(
      cal.scores, conformal_index(cal.scores.size(), alpha));
  return cal;
}

ClsPrediction mc_cp_classify(const StochasticPredictor& logit_predictor,
                             const Vec& x, const AdaptiveConfig& cfg,
                             const ClsCalibration& calibration, Rng& rng) {
  // Temperature is applied to every pass's logits before softmax; the
  // adaptive loop therefore sees calibrated probability vectors.
  SoftmaxPredictor probs(&logit_predictor, calibration.temperature);
  const AdaptiveResult mc = adaptive_mc_dropout(probs, x, cfg, rng);

  ClsPrediction out;
  out.set = calibration.method == ClsMethod::Naive
                ? naive_set(mc.mean, calibration.threshold)
                : raps_set(mc.mean, calibration.threshold, calibration.raps);
  out.mean_probs = mc.mean;
  out.variance = mc.variance;
  out.passes = mc.passes;
  out.converged = mc.converged;
  return out;
}

}  // namespace mccp
