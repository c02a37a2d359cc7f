#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mccp {

using Vec = std::vector<double>;

// ---------------------------------------------------------------- ProbVector
// A softmax output is represented as a plain Vec; these helpers state and
// check the contract (entries in [0,1], summing to 1, at least two classes).

inline bool is_prob_vector(const Vec& p, double tol = 1e-6) {
  if (p.size() < 2) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

inline int argmax(const Vec& v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty vector");
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// --------------------------------------------------------------- QuantilePair
// One regression prediction: estimated quantiles at a fixed (lo, hi) pair of
// levels. Quantile crossing (lo > hi) is a legal state and is preserved as-is;
// downstream code decides what to do about it.
struct QuantilePair {
  double lo = 0.0;
  double hi = 0.0;
};

struct QuantileLevels {
  double lo = 0.05;
  double hi = 0.95;

  bool valid() const { return 0.0 < lo && lo < hi && hi < 1.0; }
};

// ---------------------------------------------------------- MomentAccumulator
// Online per-dimension count/mean/variance over a stream of vectors
// (Welford's single-pass recurrence). Variance is the population variance
// m2/n, defined as 0 while fewer than two observations have been seen.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;

  explicit MomentAccumulator(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  std::size_t count() const { return n_; }
  std::size_t dim() const { return mean_.size(); }
  const Vec& mean() const { return mean_; }

  void update(const Vec& obs) {
    if (n_ == 0 && mean_.empty()) {
      mean_.assign(obs.size(), 0.0);
      m2_.assign(obs.size(), 0.0);
    }
    if (obs.size() != mean_.size()) {
      throw std::invalid_argument(
          "MomentAccumulator::update: observation dimension " +
          std::to_string(obs.size()) + " does not match accumulator dimension " +
          std::to_string(mean_.size()));
    }
    n_ += 1;
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t d = 0; d < obs.size(); ++d) {
      const double delta = obs[d] - mean_[d];
      mean_[d] += delta * inv_n;
      m2_[d] += delta * (obs[d] - mean_[d]);
    }
  }

  // Population variance per dimension; zeros when n <= 1.
  void variance_into(Vec& out) const {
    out.assign(mean_.size(), 0.0);
    if (n_ <= 1) return;
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t d = 0; d < m2_.size(); ++d) out[d] = m2_[d] * inv_n;
  }

  Vec variance() const {
    Vec out;
    variance_into(out);
    return out;
  }

 private:
  std::size_t n_ = 0;
  Vec mean_;
  Vec m2_;
};

// -------------------------------------------------------------- PredictionSet
// A set-valued classification prediction. `classes` is kept sorted ascending;
// emptiness is a legal, visible outcome.
struct PredictionSet {
  std::vector<int> classes;
  double top_confidence = 0.0;  // highest mean softmax entry

  bool contains(int label) const {
    return std::binary_search(classes.begin(), classes.end(), label);
  }
  std::size_t size() const { return classes.size(); }
  bool empty() const { return classes.empty(); }
};

// --------------------------------------------------------- PredictionInterval
// An interval-valued regression prediction. If conformal correction flips the
// endpoints (lo > hi) the interval is flagged empty: it covers nothing and
// has width 0.
struct PredictionInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = false;

  double width() const { return empty ? 0.0 : hi - lo; }
  bool contains(double y) const { return !empty && lo <= y && y <= hi; }
};

}  // namespace mccp
