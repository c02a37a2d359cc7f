#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mccp/mlp.hpp"
#include "mccp/types.hpp"

namespace mccp {

enum class Task { Classification, Regression };

// Immutable tabular dataset. Classification fills `labels`, regression fills
// `y`. Rows containing non-finite or unparseable cells are dropped during
// ingestion and counted in dropped_rows, with one warning string per drop.
struct TabularDataset {
  std::vector<Vec> X;
  std::vector<double> y;
  std::vector<int> labels;
  bool is_classification = false;
  std::vector<std::string> columns;  // feature column names
  std::string target_name;
  std::int64_t dropped_rows = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return X.size(); }
  std::size_t dim() const { return X.empty() ? 0 : X[0].size(); }
  int num_classes() const;
};

// Loads a headered CSV (UTF-8, ',' delimiter, '.' decimal point). The target
// column is removed from the feature matrix and parsed per task. Throws on a
// missing file, a missing target column (named in the message), or when no
// usable row remains.
TabularDataset load_csv(const std::string& path,
                        const std::string& target_column, Task task);

// Writes the dataset back out in the same format load_csv reads. Values are
// printed with 17 significant digits, so a round trip is value-exact.
void write_csv(const std::string& path, const TabularDataset& dataset);

// Seeded three-way split. Fractions of the full set: train = 1 - test;
// the calibration portion is carved out of the test block.
struct SplitSpec {
  double test_fraction = 0.2;
  double calibration_fraction_of_test = 0.25;
  std::uint64_t seed = 0;

  static SplitSpec classification_defaults() { return {0.2, 0.25, 0}; }
  static SplitSpec regression_defaults() { return {0.2, 0.02, 0}; }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> validation;
  std::vector<std::string> warnings;  // e.g. degenerate calibration size
};

// Shuffles 0..n-1 with spec.seed, then cuts contiguous blocks:
// test_n = round(n * test_fraction), cal_n = max(1, round(test_n * cal_frac)),
// validation = test_n - cal_n, train = n - test_n. Throws if any block is
// empty; warns when the calibration block has fewer than 10 points.
SplitIndices split(std::size_t n, const SplitSpec& spec);

// Row subset in the given index order.
TabularDataset subset(const TabularDataset& dataset,
                      const std::vector<std::size_t>& indices);

// Gaussian class blobs: C unit-variance clusters with centers spaced on a
// circle of radius `separation` in the first two feature dimensions.
TabularDataset synth_blobs(std::size_t n, int num_classes, std::size_t dim,
                           double separation, std::uint64_t seed);

// Heteroscedastic 1-d regression: x ~ U(-2,2), y = sin(2x) + (0.1+0.4|x|) e,
// e ~ N(0,1). The analytic level-q quantile of y|x is available from
// hetero_quantile_curve for oracle comparisons.
TabularDataset synth_hetero(std::size_t n, std::uint64_t seed);
double hetero_quantile_curve(double x, double level);

// Standard normal quantile function (Acklam's rational approximation,
// relative error ~1e-9). Exposed for quantile-curve oracles.
double normal_quantile(double p);

// Concrete-strength-like synthetic table: 1030 rows x 8 mixed-scale features
// by default, nonlinear signal with age-dependent heteroscedastic noise.
// A stand-in with the same shape and difficulty profile as the classic
// compressive-strength benchmark; any real CSV can replace it via load_csv.
TabularDataset synth_concrete_like(std::size_t n, std::uint64_t seed);

// Per-feature z-score statistics fitted on the training rows only, applied
// identically to every split. Regression targets are optionally standardized
// with their own train-fitted stats.
struct Normalizer {
  Vec feature_mean;
  Vec feature_stddev;
  double target_mean = 0.0;
  double target_stddev = 1.0;
  bool standardize_targets = false;

  static Normalizer fit(const TabularDataset& dataset,
                        const std::vector<std::size_t>& train_indices,
                        bool standardize_targets);
  Vec transform(const Vec& x) const;
  double transform_target(double y) const;
  double inverse_target(double y) const;
  TabularDataset apply(const TabularDataset& dataset) const;
};

// Recorded stochastic predictions: for each sample, the exact output vector
// of every forward pass, so any MC stream can be replayed bit-for-bit.
struct ReplayFile {
  std::size_t dim = 0;
  std::size_t declared_passes = 0;
  std::map<int, std::vector<Vec>> records;  // sample_id -> per-pass outputs
};

// CSV with fixed header "sample_id,pass,dim0,...,dimk"; values are written
// as hexadecimal floating point so the round trip is bit-exact.
void write_replay(const std::string& path, const ReplayFile& replay);
ReplayFile read_replay(const std::string& path);

// Serves the recorded passes of one sample in order; pass 0 doubles as the
// deterministic output. Throws when a run requests more passes than were
// recorded. The cursor advances per predict_once call, so construct one
// predictor per replayed run.
class ReplayPredictor : public StochasticPredictor {
 public:
  ReplayPredictor(const ReplayFile* file, int sample_id);
  std::size_t output_dim() const override;
  void predict_once(const Vec& x, Rng& rng, Vec& out) const override;
  void predict_deterministic(const Vec& x, Vec& out) const override;
  void reset() { cursor_ = 0; }

 private:
  const ReplayFile* file_;
  int sample_id_;
  mutable std::size_t cursor_ = 0;
};

}  // namespace mccp
