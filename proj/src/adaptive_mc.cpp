#include "mccp/adaptive_mc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mccp {

void AdaptiveConfig::validate() const {
  if (max_passes < 1) {
    throw std::invalid_argument("AdaptiveConfig: max_passes must be >= 1");
  }
  if (!(delta >= 0.0)) {
    throw std::invalid_argument("AdaptiveConfig: delta must be >= 0");
  }
  if (patience < 1) {
    throw std::invalid_argument("AdaptiveConfig: patience must be >= 1");
  }
}

AdaptiveResult adaptive_mc_dropout(const StochasticPredictor& predictor,
                                   const Vec& x, const AdaptiveConfig& cfg,
                                   Rng& rng, std::vector<TraceRow>* trace) {
  cfg.validate();
  const std::size_t dim = predictor.output_dim();

  MomentAccumulator acc(dim);
  Vec draw(dim);
  Vec variance(dim, 0.0);
  Vec prev_variance(dim, 0.0);
  int count = 0;
  bool converged = false;
  int pass = 0;

  while (pass < cfg.max_passes) {
    pass += 1;
    try {
      predictor.predict_once(x, rng, draw);
    } catch (const std::exception& e) {
      throw std::runtime_error("prediction failed at pass " +
                               std::to_string(pass) + ": " + e.what());
    }
    acc.update(draw);
    acc.variance_into(variance);

    double max_diff = 0.0;
    if (pass >= 2) {
      bool all_within = true;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = std::abs(variance[d] - prev_variance[d]);
        max_diff = std::max(max_diff, diff);
        if (diff > cfg.delta) all_within = false;
      }
      count = all_within ? count + 1 : 0;
    }
    if (trace) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff =
            pass >= 2 ? std::abs(variance[d] - prev_variance[d]) : 0.0;
        trace->push_back(TraceRow{pass, static_cast<int>(d), variance[d], diff,
                                  count});
      }
    }
    prev_variance = variance;
    if (count >= cfg.patience) {
      converged = true;
      break;
    }
  }

  AdaptiveResult result;
  result.mean = acc.mean();
  result.variance = variance;
  result.passes = pass;
  result.converged = converged;
  return result;
}

AdaptiveResult batch_mc_dropout(const StochasticPredictor& predictor,
                                const Vec& x, int k, Rng& rng,
                                std::vector<TraceRow>* trace) {
  if (k < 1) throw std::invalid_argument("batch_mc_dropout: k must be >= 1");
  // Patience k can never be reached before the pass budget runs out (the
  // counter is at most passes - 1), so this runs exactly k passes on the
  // same draw sequence an adaptive caller would consume.
  AdaptiveConfig cfg;
  cfg.max_passes = k;
  cfg.delta = 0.0;
  cfg.patience = k;
  AdaptiveResult result = adaptive_mc_dropout(predictor, x, cfg, rng, trace);
  result.converged = false;
  return result;
}

}  // namespace mccp
