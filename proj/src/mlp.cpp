#include "mccp/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mccp {

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) {
    throw std::invalid_argument("MlpSpec: need at least input and output widths");
  }
  for (int w : layer_widths) {
    if (w <= 0) throw std::invalid_argument("MlpSpec: layer widths must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("MlpSpec: dropout rate must lie in [0, 1)");
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

Mlp init_mlp(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  const auto& w = spec.layer_widths;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const int fan_in = w[l];
    const int fan_out = w[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Vec weight(static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out));
    for (auto& v : weight) v = rng.next_uniform(-bound, bound);
    net.weights.push_back(std::move(weight));
    net.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
  }
  return net;
}

namespace {

// z = W x + b
void affine(const Vec& w, const Vec& b, const Vec& x, Vec& z) {
  const std::size_t out = b.size();
  const std::size_t in = x.size();
  z.resize(out);
  for (std::size_t r = 0; r < out; ++r) {
    double acc = b[r];
    const double* row = w.data() + r * in;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    z[r] = acc;
  }
}

struct ForwardTrace {
  std::vector<Vec> a;      // a[0] = x, a[l+1] = input to layer l+1
  std::vector<Vec> z;      // pre-activations per layer
  std::vector<Vec> mask;   // dropout mask per hidden layer (0 or 1/(1-p))
};

// Forward pass that keeps everything backprop needs.
void forward_trace(const Mlp& net, const Vec& x, bool dropout_on, Rng* rng,
                   ForwardTrace& t) {
  const std::size_t layers = net.weights.size();
  const double p = net.spec.dropout_rate;
  const bool use_dropout = dropout_on && p > 0.0;
  const double keep_scale = use_dropout ? 1.0 / (1.0 - p) : 1.0;

  t.a.resize(layers + 1);
  t.z.resize(layers);
  t.mask.assign(layers > 0 ? layers - 1 : 0, Vec());
  t.a[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    affine(net.weights[l], net.biases[l], t.a[l], t.z[l]);
    if (l + 1 < layers) {
      Vec& h = t.a[l + 1];
      h = t.z[l];
      for (auto& v : h) v = v > 0.0 ? v : 0.0;  // rectifier
      if (use_dropout) {
        Vec& m = t.mask[l];
        m.resize(h.size());
        for (std::size_t u = 0; u < h.size(); ++u) {
          m[u] = rng->next_double() < p ? 0.0 : keep_scale;
          h[u] *= m[u];
        }
      }
    } else {
      t.a[l + 1] = t.z[l];
    }
  }
}

struct Gradients {
  std::vector<Vec> w;
  std::vector<Vec> b;

  void zero_like(const Mlp& net) {
    w.resize(net.weights.size());
    b.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      w[l].assign(net.weights[l].size(), 0.0);
      b[l].assign(net.biases[l].size(), 0.0);
    }
  }
};

// Accumulates dL/dparams for one sample given dL/d(output pre-head) in delta.
void backward_accumulate(const Mlp& net, const ForwardTrace& t, Vec delta,
                         Gradients& g) {
  const std::size_t layers = net.weights.size();
  for (std::size_t l = layers; l-- > 0;) {
    const Vec& input = t.a[l];
    Vec& gw = g.w[l];
    Vec& gb = g.b[l];
    const std::size_t out = delta.size();
    const std::size_t in = input.size();
    for (std::size_t r = 0; r < out; ++r) {
      const double d = delta[r];
      gb[r] += d;
      double* row = gw.data() + r * in;
      for (std::size_t c = 0; c < in; ++c) row[c] += d * input[c];
    }
    if (l == 0) break;
    // Propagate through W, the dropout mask, and the rectifier derivative.
    const Vec& w = net.weights[l];
    Vec next(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      const double d = delta[r];
      const double* row = w.data() + r * in;
      for (std::size_t c = 0; c < in; ++c) next[c] += d * row[c];
    }
    if (!t.mask[l - 1].empty()) {
      for (std::size_t c = 0; c < in; ++c) next[c] *= t.mask[l - 1][c];
    }
    for (std::size_t c = 0; c < in; ++c) {
      if (t.z[l - 1][c] <= 0.0) next[c] = 0.0;
    }
    delta = std::move(next);
  }
}

struct OptimizerState {
  std::vector<Vec> vw, vb;    // momentum / Adam first moment
  std::vector<Vec> sw, sb;    // Adam second moment
  long step = 0;

  void init(const Mlp& net, OptimizerConfig::Kind kind) {
    auto zeros_of = [&](const std::vector<Vec>& like, std::vector<Vec>& out) {
      out.resize(like.size());
      for (std::size_t l = 0; l < like.size(); ++l) out[l].assign(like[l].size(), 0.0);
    };
    zeros_of(net.weights, vw);
    zeros_of(net.biases, vb);
    if (kind == OptimizerConfig::Kind::Adam) {
      zeros_of(net.weights, sw);
      zeros_of(net.biases, sb);
    }
  }
};

void apply_update(Mlp& net, const Gradients& g, const OptimizerConfig& opt,
                  OptimizerState& st) {
  if (opt.kind == OptimizerConfig::Kind::SgdMomentum) {
    auto update = [&](Vec& param, Vec& vel, const Vec& grad) {
      for (std::size_t i = 0; i < param.size(); ++i) {
        vel[i] = opt.momentum * vel[i] + grad[i];
        param[i] -= opt.lr * vel[i];
      }
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      update(net.weights[l], st.vw[l], g.w[l]);
      update(net.biases[l], st.vb[l], g.b[l]);
    }
  } else {
    st.step += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(st.step));
    auto update = [&](Vec& param, Vec& m, Vec& v, const Vec& grad) {
      for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * grad[i];
        v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
      }
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      update(net.weights[l], st.vw[l], st.sw[l], g.w[l]);
      update(net.biases[l], st.vb[l], st.sb[l], g.b[l]);
    }
  }
}

// Per-sample loss and dL/d(pre-head output) for the two supported heads.
// Returns the loss; writes the output-layer delta into `delta`.
using HeadGrad = std::function<double(const Vec& output, std::size_t sample,
                                      Vec& delta)>;

TrainResult run_training(const MlpSpec& spec, const std::vector<Vec>& X,
                         std::size_t n, const TrainConfig& cfg,
                         const HeadGrad& head) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size <= 0 || cfg.epochs <= 0) {
    throw std::invalid_argument("train: batch size and epochs must be positive");
  }

  Rng root(cfg.seed);
  Rng init_rng = root.child(0);
  Rng shuffle_rng = root.child(1);
  Rng dropout_rng = root.child(2);

  TrainResult result;
  result.net = init_mlp(spec, init_rng);
  Mlp& net = result.net;

  OptimizerState st;
  st.init(net, cfg.optimizer.kind);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Gradients grads;
  ForwardTrace trace;
  Vec delta;

  const bool dropout_on = spec.dropout_rate > 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    int batch_index = 0;
    while (cursor < n) {
      const std::size_t take =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n - cursor);
      grads.zero_like(net);
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t idx = order[cursor + k];
        forward_trace(net, X[idx], dropout_on, &dropout_rng, trace);
        batch_loss += head(trace.a.back(), idx, delta);
        backward_accumulate(net, trace, delta, grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "training diverged: non-finite loss at epoch " +
            std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      const double inv = 1.0 / static_cast<double>(take);
      for (auto& layer : grads.w)
        for (auto& v : layer) v *= inv;
      for (auto& layer : grads.b)
        for (auto& v : layer) v *= inv;
      apply_update(net, grads, cfg.optimizer, st);
      epoch_loss += batch_loss;
      cursor += take;
      batch_index += 1;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

void softmax_into(const Vec& logits, double temperature, Vec& out) {
  out.resize(logits.size());
  double maxv = logits[0];
  for (double v : logits) maxv = std::max(maxv, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - maxv) / temperature);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
}

}  // namespace

Vec forward_raw(const Mlp& net, const Vec& x, bool dropout_on, Rng* rng) {
  if (x.size() != static_cast<std::size_t>(net.spec.input_width())) {
    throw std::invalid_argument("forward: input width " + std::to_string(x.size()) +
                                " does not match network input " +
                                std::to_string(net.spec.input_width()));
  }
  if (dropout_on && net.spec.dropout_rate > 0.0 && rng == nullptr) {
    throw std::invalid_argument("forward: dropout requested without an rng");
  }
  ForwardTrace t;
  forward_trace(net, x, dropout_on, rng, t);
  return t.a.back();
}

Vec softmax(const Vec& logits) {
  Vec out;
  softmax_into(logits, 1.0, out);
  return out;
}

Vec softmax_scaled(const Vec& logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("softmax_scaled: temperature must be > 0");
  }
  Vec out;
  softmax_into(logits, temperature, out);
  return out;
}

double pinball_loss(const Vec& pred, double y,
                    const std::vector<double>& levels) {
  if (pred.size() != levels.size()) {
    throw std::invalid_argument("pinball_loss: one prediction per level required");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double tau = levels[j];
    const double diff = y - pred[j];
    total += std::max(tau * diff, (tau - 1.0) * diff);
  }
  return total;
}

double pinball_loss(const std::vector<QuantilePair>& preds, const Vec& ys,
                    const QuantileLevels& levels) {
  if (preds.size() != ys.size() || preds.empty()) {
    throw std::invalid_argument("pinball_loss: size mismatch or empty input");
  }
  if (!levels.valid()) {
    throw std::invalid_argument("pinball_loss: levels must satisfy 0 < lo < hi < 1");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += pinball_loss({preds[i].lo, preds[i].hi}, ys[i],
                          {levels.lo, levels.hi});
  }
  return total / static_cast<double>(preds.size());
}

double cross_entropy(const Vec& probs, int label) {
  const double p = probs[static_cast<std::size_t>(label)];
  return -std::log(std::max(p, 1e-300));
}

OptimizerConfig OptimizerConfig::sgd_momentum(double lr, double momentum) {
  OptimizerConfig c;
  c.kind = Kind::SgdMomentum;
  c.lr = lr;
  c.momentum = momentum;
  return c;
}

OptimizerConfig OptimizerConfig::adam(double lr) {
  OptimizerConfig c;
  c.kind = Kind::Adam;
  c.lr = lr;
  return c;
}

TrainConfig TrainConfig::classification_defaults() {
  TrainConfig c;
  c.optimizer = OptimizerConfig::sgd_momentum(0.1, 0.9);
  c.batch_size = 128;
  c.epochs = 10;
  c.loss = LossKind::CrossEntropy;
  return c;
}

TrainConfig TrainConfig::regression_defaults() {
  TrainConfig c;
  c.optimizer = OptimizerConfig::adam(0.001);
  c.batch_size = 32;
  c.epochs = 100;
  c.loss = LossKind::MultiQuantile;
  c.quantile_levels = {0.05, 0.95};
  return c;
}

TrainResult train_classifier(const MlpSpec& spec, const std::vector<Vec>& X,
                             const std::vector<int>& labels,
                             const TrainConfig& cfg) {
  if (X.size() != labels.size()) {
    throw std::invalid_argument("train_classifier: feature/label size mismatch");
  }
  if (spec.head != Head::Softmax) {
    throw std::invalid_argument("train_classifier: needs a softmax head");
  }
  const int classes = spec.output_width();
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw std::invalid_argument("train_classifier: label out of range");
    }
  }
  Vec probs;
  auto head = [&](const Vec& logits, std::size_t i, Vec& delta) {
    softmax_into(logits, 1.0, probs);
    const int y = labels[i];
    delta = probs;
    delta[static_cast<std::size_t>(y)] -= 1.0;
    return cross_entropy(probs, y);
  };
  return run_training(spec, X, X.size(), cfg, head);
}

TrainResult train_regressor(const MlpSpec& spec, const std::vector<Vec>& X,
                            const Vec& targets, const TrainConfig& cfg) {
  if (X.size() != targets.size()) {
    throw std::invalid_argument("train_regressor: feature/target size mismatch");
  }
  if (spec.head != Head::Identity) {
    throw std::invalid_argument("train_regressor: needs an identity head");
  }
  const auto& levels = cfg.quantile_levels;
  if (levels.empty() ||
      spec.output_width() != static_cast<int>(levels.size())) {
    throw std::invalid_argument(
        "train_regressor: output width must equal the number of quantile levels");
  }
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    if (!(levels[j] < levels[j + 1])) {
      throw std::invalid_argument("train_regressor: levels must be strictly increasing");
    }
  }
  auto head = [&](const Vec& output, std::size_t i, Vec& delta) {
    const double y = targets[i];
    delta.resize(output.size());
    double loss = 0.0;
    for (std::size_t j = 0; j < output.size(); ++j) {
      const double tau = levels[j];
      const double diff = y - output[j];
      loss += std::max(tau * diff, (tau - 1.0) * diff);
      // dL/d(pred): -tau on the under-prediction side, (1-tau) otherwise.
      delta[j] = diff > 0.0 ? -tau : (1.0 - tau);
    }
    return loss;
  };
  return run_training(spec, X, X.size(), cfg, head);
}

namespace {

// Mean batch loss with dropout off, used by the finite-difference checks.
double batch_loss(const Mlp& net, const std::vector<Vec>& X,
                  const std::function<double(const Vec&, std::size_t)>& sample_loss) {
  double total = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Vec out = forward_raw(net, X[i], false, nullptr);
    total += sample_loss(out, i);
  }
  return total / static_cast<double>(X.size());
}

Gradients analytic_batch_gradients(
    const Mlp& net, const std::vector<Vec>& X,
    const std::function<void(const Vec&, std::size_t, Vec&)>& sample_delta) {
  Gradients g;
  g.zero_like(net);
  ForwardTrace trace;
  Vec delta;
  for (std::size_t i = 0; i < X.size(); ++i) {
    forward_trace(net, X[i], false, nullptr, trace);
    sample_delta(trace.a.back(), i, delta);
    backward_accumulate(net, trace, delta, g);
  }
  const double inv = 1.0 / static_cast<double>(X.size());
  for (auto& layer : g.w)
    for (auto& v : layer) v *= inv;
  for (auto& layer : g.b)
    for (auto& v : layer) v *= inv;
  return g;
}

double grad_check_impl(
    const Mlp& reference, const std::vector<Vec>& X,
    const std::function<double(const Vec&, std::size_t)>& sample_loss,
    const std::function<void(const Vec&, std::size_t, Vec&)>& sample_delta) {
  Mlp net = reference;  // perturbed in place below
  const Gradients g = analytic_batch_gradients(net, X, sample_delta);

  const double h = 1e-5;
  double max_rel = 0.0;
  auto check_param = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = batch_loss(net, X, sample_loss);
    param = saved - h;
    const double down = batch_loss(net, X, sample_loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
      check_param(net.weights[l][i], g.w[l][i]);
    }
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
      check_param(net.biases[l][i], g.b[l][i]);
    }
  }
  return max_rel;
}

}  // namespace

namespace {

void classifier_delta(const Vec& logits, int label, Vec& probs, Vec& delta) {
  softmax_into(logits, 1.0, probs);
  delta = probs;
  delta[static_cast<std::size_t>(label)] -= 1.0;
}

}  // namespace

BatchGradients classifier_gradients(const Mlp& net, const std::vector<Vec>& X,
                                    const std::vector<int>& labels) {
  Vec probs;
  auto del = [&](const Vec& logits, std::size_t i, Vec& delta) {
    classifier_delta(logits, labels[i], probs, delta);
  };
  Gradients g = analytic_batch_gradients(net, X, del);
  return BatchGradients{std::move(g.w), std::move(g.b)};
}

BatchGradients regressor_gradients(const Mlp& net, const std::vector<Vec>& X,
                                   const Vec& targets,
                                   const std::vector<double>& levels) {
  auto del = [&](const Vec& out, std::size_t i, Vec& delta) {
    delta.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double diff = targets[i] - out[j];
      delta[j] = diff > 0.0 ? -levels[j] : (1.0 - levels[j]);
    }
  };
  Gradients g = analytic_batch_gradients(net, X, del);
  return BatchGradients{std::move(g.w), std::move(g.b)};
}

double grad_check_classifier(const Mlp& net, const std::vector<Vec>& X,
                             const std::vector<int>& labels) {
  Vec probs;
  auto loss = [&](const Vec& logits, std::size_t i) {
    softmax_into(logits, 1.0, probs);
    return cross_entropy(probs, labels[i]);
  };
  auto del = [&](const Vec& logits, std::size_t i, Vec& delta) {
    classifier_delta(logits, labels[i], probs, delta);
  };
  return grad_check_impl(net, X, loss, del);
}

double grad_check_regressor(const Mlp& net, const std::vector<Vec>& X,
                            Vec targets, const std::vector<double>& levels) {
  // Keep every (target - prediction) safely away from the pinball kink so the
  // loss is smooth across the +-h window at each parameter.
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Vec out = forward_raw(net, X[i], false, nullptr);
    for (double pred : out) {
      while (std::abs(targets[i] - pred) < 1e-3) targets[i] += 2e-3;
    }
  }
  auto loss = [&](const Vec& out, std::size_t i) {
    return pinball_loss(out, targets[i], levels);
  };
  auto del = [&](const Vec& out, std::size_t i, Vec& delta) {
    delta.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double diff = targets[i] - out[j];
      delta[j] = diff > 0.0 ? -levels[j] : (1.0 - levels[j]);
    }
  };
  return grad_check_impl(net, X, loss, del);
}

std::size_t MlpPredictor::output_dim() const {
  return static_cast<std::size_t>(net_->spec.output_width());
}

void MlpPredictor::predict_once(const Vec& x, Rng& rng, Vec& out) const {
  out = forward_raw(*net_, x, true, &rng);
}

void MlpPredictor::predict_deterministic(const Vec& x, Vec& out) const {
  out = forward_raw(*net_, x, false, nullptr);
}

void SoftmaxPredictor::predict_once(const Vec& x, Rng& rng, Vec& out) const {
  Vec logits;
  logits_->predict_once(x, rng, logits);
  softmax_into(logits, temperature_, out);
}

void SoftmaxPredictor::predict_deterministic(const Vec& x, Vec& out) const {
  Vec logits;
  logits_->predict_deterministic(x, logits);
  softmax_into(logits, temperature_, out);
}

std::string weights_to_string(const Mlp& net) {
  std::ostringstream os;
  os << "mlp v1\n";
  os << "widths";
  for (int w : net.spec.layer_widths) os << ' ' << w;
  os << '\n';
  os << "dropout " << net.spec.dropout_rate << '\n';
  os << "head " << (net.spec.head == Head::Softmax ? "softmax" : "identity")
     << '\n';
  char buf[64];
  auto dump = [&](const std::vector<Vec>& layers, const char* tag) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      os << tag << ' ' << l;
      for (double v : layers[l]) {
        std::snprintf(buf, sizeof buf, " %a", v);
        os << buf;
      }
      os << '\n';
    }
  };
  dump(net.weights, "w");
  dump(net.biases, "b");
  return os.str();
}

Mlp weights_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string token;
  is >> token;
  std::string version;
  is >> version;
  if (token != "mlp" || version != "v1") {
    throw std::invalid_argument("weights_from_string: unrecognized format");
  }
  Mlp net;
  is >> token;  // "widths"
  std::string line;
  std::getline(is, line);
  {
    std::istringstream ls(line);
    int w;
    while (ls >> w) net.spec.layer_widths.push_back(w);
  }
  is >> token >> net.spec.dropout_rate;  // "dropout"
  is >> token >> line;                   // "head"
  net.spec.head = line == "softmax" ? Head::Softmax : Head::Identity;
  net.spec.validate();

  const auto& widths = net.spec.layer_widths;
  const std::size_t layers = widths.size() - 1;
  net.weights.resize(layers);
  net.biases.resize(layers);
  for (std::size_t k = 0; k < 2 * layers; ++k) {
    std::size_t l;
    is >> token >> l;
    if (!is || l >= layers) {
      throw std::invalid_argument("weights_from_string: truncated record");
    }
    const std::size_t in = static_cast<std::size_t>(widths[l]);
    const std::size_t out = static_cast<std::size_t>(widths[l + 1]);
    Vec& dst = token == "w" ? net.weights[l] : net.biases[l];
    dst.resize(token == "w" ? in * out : out);
    for (auto& v : dst) {
      // Values are hex floats; stream extraction of doubles does not accept
      // that format, strtod does.
      std::string word;
      if (!(is >> word)) {
        throw std::invalid_argument("weights_from_string: truncated values");
      }
      char* end = nullptr;
      v = std::strtod(word.c_str(), &end);
      if (end == word.c_str() || *end != '\0') {
        throw std::invalid_argument("weights_from_string: bad value '" + word + "'");
      }
    }
  }
  return net;
}

}  // namespace mccp
