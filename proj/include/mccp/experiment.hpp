#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mccp/adaptive_mc.hpp"
#include "mccp/conformal_cls.hpp"
#include "mccp/conformal_reg.hpp"
#include "mccp/dataset.hpp"
#include "mccp/metrics.hpp"
#include "mccp/mlp.hpp"
#include "mccp/parallel.hpp"

namespace mccp {

inline constexpr const char* kArtifactVersion = "1.0";

// Where the rows come from: a CSV on disk, one of the synthetic generators,
// or a recorded prediction stream.
struct DatasetSpec {
  std::string kind;    // "csv" | "synth_blobs" | "synth_hetero" | "synth_concrete_like"
  std::string path;    // csv only
  std::string target;  // csv only: target column name
  std::size_t n = 1030;
  int classes = 3;        // synth_blobs
  std::size_t dim = 2;    // synth_blobs
  double separation = 1.6;  // synth_blobs
};

struct ConformalSpec {
  ClsMethod cls_method = ClsMethod::Raps;  // set rule used by mc-cp
  double alpha = 0.1;
  RapsParams raps;
  bool temperature_scaling = true;  // classification only
  // When true, the mc-cp method calibrates its conformal scores on MC-mean
  // predictions (the same pipeline it evaluates with, so calibration and
  // test scores stay exchangeable and coverage lands at 1-alpha) instead of
  // single deterministic passes. Deterministic calibration with MC-mean
  // prediction sets skews coverage upward; the effect is mild for interval
  // endpoints but strong for softmax set growth, so the JSON layer defaults
  // this to true for classification and false for regression. Methods other
  // than mc-cp always calibrate deterministically.
  bool mc_calibration = false;
};

// Complete, serializable description of an experiment. Together with the
// code version it determines every random draw in the run.
struct ExperimentConfig {
  Task task = Task::Classification;
  DatasetSpec dataset;
  std::vector<std::size_t> hidden = {128, 64};
  double dropout = 0.5;
  TrainConfig train = TrainConfig::classification_defaults();
  AdaptiveConfig adaptive;
  ConformalSpec conformal;
  SplitSpec split = SplitSpec::classification_defaults();
  int trials = 5;
  std::uint64_t master_seed = 20240915;
  std::vector<std::string> methods;  // defaulted per task when empty
  ExecMode exec = ExecMode::Serial;

  std::vector<std::string> effective_methods() const;
  void validate() const;  // throws ConfigError with a field path
};

// Configuration problems carry the offending field's path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field_path, const std::string& message)
      : std::runtime_error("config error at " + field_path + ": " + message),
        field_path_(field_path) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

struct TrialResult {
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, EvalReport> reports;  // method name -> report
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
};

// Everything one trial needs after data preparation and training: the
// trained net, normalization stats, splits, and conformal calibrations.
struct TrialArtifacts {
  std::uint64_t trial_seed = 0;
  Mlp net;
  Normalizer normalizer;
  TabularDataset calibration;  // normalized
  TabularDataset validation;   // normalized
  int num_classes = 0;
  double temperature = 1.0;
  ClsCalibration naive_cal;  // deterministic-pass calibration (naive method)
  ClsCalibration raps_cal;   // deterministic-pass calibration (raps method)
  RegCalibration reg_cal;    // deterministic-pass calibration (cqr method)
  // Calibration used by mc-cp: identical to the deterministic one for the
  // configured set rule unless ConformalSpec::mc_calibration is on, in which
  // case the scores come from MC-mean predictions on the calibration split.
  ClsCalibration mccp_cal;
  RegCalibration mccp_reg_cal;
};

// Data generation, split, training and calibration for one trial. Synthetic
// datasets are redrawn per trial from the trial seed; CSV data is reloaded
// but split differently per trial.
TrialArtifacts prepare_trial(const ExperimentConfig& config, int trial_index);

// Evaluates the configured methods on the trial's validation split with the
// given adaptive budget. Per-sample MC streams depend only on the trial seed
// and the sample index, so ExecMode cannot change any number. When
// mccp_passes is non-null it receives the per-sample pass counts of the
// adaptive MC runs (for sensitivity pooling).
std::map<std::string, EvalReport> evaluate_methods(
    const ExperimentConfig& config, const TrialArtifacts& artifacts,
    const AdaptiveConfig& adaptive, std::vector<int>* mccp_passes = nullptr);

// Full run: trials sequentially, each trained and evaluated on its own
// seeded data. Per-inference wall-clock timing goes to `log` (informational
// only, never part of the results). A trial failure aborts the run with the
// trial seed in the message.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::ostream* log = nullptr);

struct SensitivityCell {
  double delta = 0.0;
  int patience = 0;
  double mean_error = 0.0;   // test error (classification) or MAE (regression)
  double mean_passes = 0.0;  // pooled over samples and trials
  double passes_stddev = 0.0;
  double mean_size = 0.0;  // mean set size / interval width
  double coverage = 0.0;
};

// Cross-product sweep over adaptive-termination settings. Training and
// calibration are reused across cells: deterministic calibration does not
// depend on the adaptive budget, and the mc_calibration variant is pinned to
// the base adaptive config so cells stay comparable.
std::vector<SensitivityCell> run_sensitivity(
    const ExperimentConfig& config, const std::vector<double>& delta_grid,
    const std::vector<int>& patience_grid, std::ostream* log = nullptr);

// Per-pass convergence trace rows of the adaptive MC run for the requested
// validation samples of trial 0, using exactly the evaluation rng streams.
struct SampleTraceRow {
  std::size_t sample_id = 0;
  TraceRow row;
};
std::vector<SampleTraceRow> trace_samples(
    const ExperimentConfig& config, const std::vector<std::size_t>& sample_ids);

// Quantile-band plot data (regression only): one row per validation sample,
// sorted by the first feature, in original (de-standardized) units.
struct PlotdataTable {
  std::vector<std::string> method_names;
  // Each row: x, y, then per method raw_lo, raw_hi, conformal_lo,
  // conformal_hi. Width = 2 + 4 * method_names.size().
  std::vector<std::vector<double>> rows;
};
PlotdataTable quantile_plotdata(const ExperimentConfig& config);

}  // namespace mccp
