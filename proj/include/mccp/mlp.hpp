#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mccp/rng.hpp"
#include "mccp/types.hpp"

namespace mccp {

// ------------------------------------------------------------------- network

enum class Head {
  Softmax,   // classification: outputs are logits, softmax applied downstream
  Identity,  // regression: outputs are read directly (one per quantile level)
};

struct MlpSpec {
  std::vector<int> layer_widths;  // input, hidden..., output
  double dropout_rate = 0.5;      // zero probability per hidden unit
  Head head = Head::Softmax;

  int input_width() const { return layer_widths.front(); }
  int output_width() const { return layer_widths.back(); }
  void validate() const;  // throws std::invalid_argument on bad shapes
};

// A fully-connected network with rectifier hidden activations. Weights are
// row-major per layer: weights[l][row * in + col] maps layer input col to
// output row.
struct Mlp {
  MlpSpec spec;
  std::vector<Vec> weights;
  std::vector<Vec> biases;

  std::size_t parameter_count() const;
};

// Scaled-uniform fan-in initialization: weights U(-1/sqrt(fan_in),
// +1/sqrt(fan_in)), biases zero, all draws from `rng`.
Mlp init_mlp(const MlpSpec& spec, Rng& rng);

// Forward pass up to (and excluding) the head: logits for a softmax head,
// raw quantile outputs for an identity head. With dropout_on, each hidden
// unit is zeroed with probability p and survivors are scaled by 1/(1-p)
// (inverted dropout), so the mask-expectation of the pass equals the
// deterministic pass. rng may be null when dropout_on is false.
Vec forward_raw(const Mlp& net, const Vec& x, bool dropout_on, Rng* rng);

Vec softmax(const Vec& logits);
// softmax(logits / temperature); temperature must be > 0.
Vec softmax_scaled(const Vec& logits, double temperature);

// -------------------------------------------------------------------- losses

// Pinball (quantile) loss for one prediction vector against a scalar target:
// sum over levels tau of max(tau * (y - pred), (tau - 1) * (y - pred)).
double pinball_loss(const Vec& pred, double y,
                    const std::vector<double>& levels);

// Mean over samples of the per-sample pinball loss for (lo, hi) pairs.
double pinball_loss(const std::vector<QuantilePair>& preds, const Vec& ys,
                    const QuantileLevels& levels);

double cross_entropy(const Vec& probs, int label);

// ------------------------------------------------------------------ training

struct OptimizerConfig {
  enum class Kind { SgdMomentum, Adam };
  Kind kind = Kind::SgdMomentum;
  double lr = 0.1;
  double momentum = 0.9;                         // SGD only
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // Adam only

  static OptimizerConfig sgd_momentum(double lr = 0.1, double momentum = 0.9);
  static OptimizerConfig adam(double lr = 0.001);
};

enum class LossKind { CrossEntropy, MultiQuantile };

struct TrainConfig {
  OptimizerConfig optimizer;
  int batch_size = 128;
  int epochs = 10;
  LossKind loss = LossKind::CrossEntropy;
  std::vector<double> quantile_levels = {0.05, 0.95};
  std::uint64_t seed = 0;

  // lr 0.1, momentum 0.9, batch 128, 10 epochs, cross-entropy
  static TrainConfig classification_defaults();
  // Adam lr 0.001, batch 32, 100 epochs, levels (0.05, 0.95)
  static TrainConfig regression_defaults();
};

struct TrainResult {
  Mlp net;
  std::vector<double> epoch_losses;  // mean per-sample loss per epoch
};

// Both trainers are deterministic given cfg.seed: initialization, shuffling
// and dropout masks are all drawn from streams derived from it. A non-finite
// batch loss aborts with a std::runtime_error naming the epoch and batch.
TrainResult train_classifier(const MlpSpec& spec, const std::vector<Vec>& X,
                             const std::vector<int>& labels,
                             const TrainConfig& cfg);
TrainResult train_regressor(const MlpSpec& spec, const std::vector<Vec>& X,
                            const Vec& targets, const TrainConfig& cfg);

// -------------------------------------------------------------- grad checking

// Analytic mean-batch gradients with dropout off, in layer order.
struct BatchGradients {
  std::vector<Vec> weights;
  std::vector<Vec> biases;
};
BatchGradients classifier_gradients(const Mlp& net, const std::vector<Vec>& X,
                                    const std::vector<int>& labels);
BatchGradients regressor_gradients(const Mlp& net, const std::vector<Vec>& X,
                                   const Vec& targets,
                                   const std::vector<double>& levels);

// Compare analytic batch gradients against central finite differences
// (step 1e-5) with dropout off; returns the maximum relative error over all
// parameters. The regression variant nudges targets away from pinball kinks
// before differencing.
double grad_check_classifier(const Mlp& net, const std::vector<Vec>& X,
                             const std::vector<int>& labels);
double grad_check_regressor(const Mlp& net, const std::vector<Vec>& X,
                            Vec targets, const std::vector<double>& levels);

// ----------------------------------------------------------------- predictors

// Behavioral contract for anything the adaptive Monte Carlo loop can sample.
// predict_once draws one stochastic pass (dropout active) using the caller's
// rng; predict_deterministic is pure and rng-free.
class StochasticPredictor {
 public:
  virtual ~StochasticPredictor() = default;
  virtual std::size_t output_dim() const = 0;
  virtual void predict_once(const Vec& x, Rng& rng, Vec& out) const = 0;
  virtual void predict_deterministic(const Vec& x, Vec& out) const = 0;
};

// Raw network outputs: logits (softmax head) or quantile pairs (identity
// head). Holds a non-owning pointer; the net must outlive the predictor.
class MlpPredictor : public StochasticPredictor {
 public:
  explicit MlpPredictor(const Mlp* net) : net_(net) {}
  std::size_t output_dim() const override;
  void predict_once(const Vec& x, Rng& rng, Vec& out) const override;
  void predict_deterministic(const Vec& x, Vec& out) const override;

 private:
  const Mlp* net_;
};

// Adapts a logit predictor into class probabilities at a fixed temperature:
// every pass (stochastic or not) is softmax(logits / T).
class SoftmaxPredictor : public StochasticPredictor {
 public:
  SoftmaxPredictor(const StochasticPredictor* logits, double temperature)
      : logits_(logits), temperature_(temperature) {}
  std::size_t output_dim() const override { return logits_->output_dim(); }
  void predict_once(const Vec& x, Rng& rng, Vec& out) const override;
  void predict_deterministic(const Vec& x, Vec& out) const override;

 private:
  const StochasticPredictor* logits_;
  double temperature_;
};

// ------------------------------------------------------------- serialization

// Flat text record of shapes and row-major values; round-trips bit-exactly
// (hex float formatting).
std::string weights_to_string(const Mlp& net);
Mlp weights_from_string(const std::string& text);

}  // namespace mccp
