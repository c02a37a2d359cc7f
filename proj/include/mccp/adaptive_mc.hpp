#pragma once

#include <vector>

#include "mccp/mlp.hpp"
#include "mccp/rng.hpp"
#include "mccp/types.hpp"

namespace mccp {

struct AdaptiveConfig {
  int max_passes = 1000;  // K
  double delta = 5e-4;    // per-dimension variance-change threshold
  int patience = 10;      // consecutive converged passes required

  void validate() const;  // throws std::invalid_argument
};

struct AdaptiveResult {
  Vec mean;       // posterior predictive mean over all passes performed
  Vec variance;   // population variance per output dimension
  int passes = 0;
  bool converged = false;  // true iff terminated by patience, not by K
};

// One row per (pass, dimension) of the convergence diagnostics: the running
// variance, its absolute change since the previous pass (0 on the first), and
// the patience counter after the pass.
struct TraceRow {
  int pass = 0;  // 1-based
  int dim = 0;
  double variance = 0.0;
  double diff = 0.0;
  int patience_count = 0;
};

// Adaptive Monte Carlo dropout: repeatedly draws stochastic predictions,
// tracking per-dimension running variance. From the second pass on, the
// absolute variance change per dimension is compared against cfg.delta; a
// pass where ALL dimensions move at most delta increments the patience
// counter, any other pass resets it to zero. The loop stops once the counter
// reaches cfg.patience (converged) or after cfg.max_passes draws (not
// converged). The previous-variance snapshot is refreshed on every pass,
// including resetting ones.
//
// A predictor failure is rethrown with the 1-based pass index attached.
AdaptiveResult adaptive_mc_dropout(const StochasticPredictor& predictor,
                                   const Vec& x, const AdaptiveConfig& cfg,
                                   Rng& rng,
                                   std::vector<TraceRow>* trace = nullptr);

// Conventional fixed-budget Monte Carlo dropout: exactly k passes, no
// convergence check. Equivalent to adaptive_mc_dropout with patience = k on
// the same rng stream.
AdaptiveResult batch_mc_dropout(const StochasticPredictor& predictor,
                                const Vec& x, int k, Rng& rng,
                                std::vector<TraceRow>* trace = nullptr);

}  // namespace mccp
