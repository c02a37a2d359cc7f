#include "mccp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "mccp/quantile.hpp"
#include "mccp/rng.hpp"

namespace mccp {

namespace {

// Fixed stream salts so every random draw is a pure function of
// (master_seed, trial_index, purpose, sample_index).
constexpr std::uint64_t kDataStream = 0xD5;
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kEvalStream = 3;
constexpr std::uint64_t kCalibStream = 4;

const std::set<std::string>& valid_methods(Task task) {
  static const std::set<std::string> cls = {"baseline", "mc", "naive", "raps",
                                            "mc-cp"};
  static const std::set<std::string> reg = {"baseline", "mc", "cqr", "mc-cp"};
  return task == Task::Classification ? cls : reg;
}

TabularDataset make_dataset(const ExperimentConfig& config,
                            std::uint64_t trial_seed) {
  const DatasetSpec& d = config.dataset;
  const std::uint64_t data_seed = derive_seed(trial_seed, kDataStream);
  if (d.kind == "csv") return load_csv(d.path, d.target, config.task);
  if (d.kind == "synth_blobs") {
    return synth_blobs(d.n, d.classes, d.dim, d.separation, data_seed);
  }
  if (d.kind == "synth_hetero") return synth_hetero(d.n, data_seed);
  if (d.kind == "synth_concrete_like") {
    return synth_concrete_like(d.n, data_seed);
  }
  throw ConfigError("dataset.kind", "unknown dataset kind '" + d.kind + "'");
}

// Per-sample evaluation products shared by every method.
struct SampleSlot {
  Vec det_probs;         // classification: temperature-scaled softmax
  Vec mc_probs;          // classification: adaptive MC mean
  QuantilePair det_pair{0.0, 0.0};
  QuantilePair mc_pair{0.0, 0.0};
  int passes = 1;
  bool converged = false;
  std::string error;
};

PredictionSet singleton_set(const Vec& probs) {
  PredictionSet s;
  s.classes = {static_cast<int>(argmax(probs))};
  s.top_confidence = probs[argmax(probs)];
  return s;
}

std::vector<SampleSlot> compute_slots(const ExperimentConfig& config,
                                      const TrialArtifacts& artifacts,
                                      const AdaptiveConfig& adaptive,
                                      bool need_mc) {
  const TabularDataset& val = artifacts.validation;
  const std::size_t n = val.size();
  std::vector<SampleSlot> slots(n);
  const Rng eval_base(derive_seed(artifacts.trial_seed, kEvalStream));

  for_each_index(n, config.exec, [&](std::size_t i) {
    SampleSlot& slot = slots[i];
    try {
      MlpPredictor logits(&artifacts.net);
      const Vec& x = val.X[i];
      if (config.task == Task::Classification) {
        Vec z;
        logits.predict_deterministic(x, z);
        slot.det_probs = softmax_scaled(z, artifacts.temperature);
        if (need_mc) {
          SoftmaxPredictor probs(&logits, artifacts.temperature);
          Rng rng = eval_base.child(i);
          const AdaptiveResult res =
              adaptive_mc_dropout(probs, x, adaptive, rng);
          slot.mc_probs = res.mean;
          slot.passes = static_cast<int>(res.passes);
          slot.converged = res.converged;
        }
      } else {
        Vec p;
        logits.predict_deterministic(x, p);
        slot.det_pair = QuantilePair{p[0], p[1]};
        if (need_mc) {
          Rng rng = eval_base.child(i);
          const AdaptiveResult res =
              adaptive_mc_dropout(logits, x, adaptive, rng);
          slot.mc_pair = QuantilePair{res.mean[0], res.mean[1]};
          slot.passes = static_cast<int>(res.passes);
          slot.converged = res.converged;
        }
      }
    } catch (const std::exception& e) {
      slot.error = e.what();  // rethrown after the loop: no throws cross omp
    }
  });

  for (const auto& slot : slots) {
    if (!slot.error.empty()) {
      throw std::runtime_error("evaluation failed: " + slot.error);
    }
  }
  return slots;
}

}  // namespace

std::vector<std::string> ExperimentConfig::effective_methods() const {
  if (!methods.empty()) return methods;
  if (task == Task::Classification) {
    return {"baseline", "mc", "naive", "raps", "mc-cp"};
  }
  return {"baseline", "mc", "cqr", "mc-cp"};
}

void ExperimentConfig::validate() const {
  const std::set<std::string> kinds = {"csv", "synth_blobs", "synth_hetero",
                                       "synth_concrete_like"};
  if (!kinds.count(dataset.kind)) {
    throw ConfigError("dataset.kind",
                      "unknown dataset kind '" + dataset.kind + "'");
  }
  if (dataset.kind == "csv") {
    if (dataset.path.empty()) {
      throw ConfigError("dataset.path", "csv datasets need a file path");
    }
    if (dataset.target.empty()) {
      throw ConfigError("dataset.target",
                        "csv datasets need a target column name");
    }
  } else if (dataset.n < 10) {
    throw ConfigError("dataset.n", "synthetic datasets need n >= 10");
  }
  if (dataset.kind == "synth_blobs") {
    if (task != Task::Classification) {
      throw ConfigError("dataset.kind",
                        "synth_blobs requires task=classification");
    }
    if (dataset.classes < 2) {
      throw ConfigError("dataset.classes", "need at least two classes");
    }
    if (dataset.dim < 2) {
      throw ConfigError("dataset.dim", "need at least two feature dimensions");
    }
  }
  if ((dataset.kind == "synth_hetero" ||
       dataset.kind == "synth_concrete_like") &&
      task != Task::Regression) {
    throw ConfigError("dataset.kind",
                      dataset.kind + " requires task=regression");
  }
  if (hidden.empty()) {
    throw ConfigError("model.hidden", "need at least one hidden layer");
  }
  for (std::size_t w : hidden) {
    if (w < 1) throw ConfigError("model.hidden", "layer widths must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("model.dropout", "dropout must lie in [0, 1)");
  }
  if (train.optimizer.lr <= 0.0) {
    throw ConfigError("train.lr", "learning rate must be positive");
  }
  if (train.optimizer.momentum < 0.0 || train.optimizer.momentum >= 1.0) {
    throw ConfigError("train.momentum", "momentum must lie in [0, 1)");
  }
  if (train.batch_size < 1) {
    throw ConfigError("train.batch_size", "batch size must be >= 1");
  }
  if (train.epochs < 1) {
    throw ConfigError("train.epochs", "epochs must be >= 1");
  }
  if (task == Task::Regression) {
    const auto& q = train.quantile_levels;
    const bool ok =
        q.size() == 2 && 0.0 < q[0] && q[0] < q[1] && q[1] < 1.0;
    if (!ok) {
      throw ConfigError("train.quantile_levels",
                        "need exactly two levels with 0 < lo < hi < 1");
    }
  }
  try {
    adaptive.validate();
  } catch (const std::exception& e) {
    throw ConfigError("adaptive", e.what());
  }
  if (conformal.alpha <= 0.0 || conformal.alpha >= 1.0) {
    throw ConfigError("conformal.alpha", "alpha must lie in (0, 1)");
  }
  if (conformal.raps.lambda < 0.0) {
    throw ConfigError("conformal.lambda", "lambda must be >= 0");
  }
  if (conformal.raps.k_reg < 1) {
    throw ConfigError("conformal.k_reg", "k_reg must be >= 1");
  }
  if (split.test_fraction <= 0.0 || split.test_fraction >= 1.0) {
    throw ConfigError("split.test_fraction", "must lie in (0, 1)");
  }
  if (split.calibration_fraction_of_test <= 0.0 ||
      split.calibration_fraction_of_test >= 1.0) {
    throw ConfigError("split.calibration_fraction_of_test",
                      "must lie in (0, 1)");
  }
  if (trials < 1) throw ConfigError("trials", "need at least one trial");
  const auto& allowed = valid_methods(task);
  const auto listed = effective_methods();
  for (std::size_t i = 0; i < listed.size(); ++i) {
    if (!allowed.count(listed[i])) {
      throw ConfigError("methods[" + std::to_string(i) + "]",
                        "unknown method '" + listed[i] + "' for this task");
    }
  }
}

TrialArtifacts prepare_trial(const ExperimentConfig& config, int trial_index) {
  TrialArtifacts art;
  art.trial_seed = derive_seed(config.master_seed,
                               static_cast<std::uint64_t>(trial_index));

  const TabularDataset dataset = make_dataset(config, art.trial_seed);
  SplitSpec split_spec = config.split;
  split_spec.seed = derive_seed(art.trial_seed, kSplitStream);
  const SplitIndices idx = split(dataset.size(), split_spec);

  art.normalizer = Normalizer::fit(dataset, idx.train,
                                   config.task == Task::Regression);
  const TabularDataset train_set =
      art.normalizer.apply(subset(dataset, idx.train));
  art.calibration = art.normalizer.apply(subset(dataset, idx.calibration));
  art.validation = art.normalizer.apply(subset(dataset, idx.validation));
  art.num_classes = dataset.num_classes();

  MlpSpec spec;
  spec.layer_widths.push_back(dataset.dim());
  for (std::size_t w : config.hidden) spec.layer_widths.push_back(w);
  spec.dropout_rate = config.dropout;
  TrainConfig tc = config.train;
  tc.seed = derive_seed(art.trial_seed, kTrainStream);
  if (config.task == Task::Classification) {
    spec.layer_widths.push_back(static_cast<std::size_t>(art.num_classes));
    spec.head = Head::Softmax;
    tc.loss = LossKind::CrossEntropy;
    art.net = train_classifier(spec, train_set.X, train_set.labels, tc).net;
  } else {
    spec.layer_widths.push_back(2);
    spec.head = Head::Identity;
    tc.loss = LossKind::MultiQuantile;
    art.net = train_regressor(spec, train_set.X, train_set.y, tc).net;
  }

  // Calibration. The single-method baselines (naive, raps, cqr) always
  // calibrate on deterministic passes, matching how they predict. mc-cp gets
  // its own calibration: a copy of the deterministic one, or scores from
  // MC-mean predictions when the exchangeable variant is requested.
  MlpPredictor logits(&art.net);
  const std::size_t cal_n = art.calibration.size();
  if (config.task == Task::Classification) {
    std::vector<Vec> cal_logits(cal_n);
    for (std::size_t i = 0; i < cal_n; ++i) {
      logits.predict_deterministic(art.calibration.X[i], cal_logits[i]);
    }
    art.temperature =
        config.conformal.temperature_scaling
            ? fit_temperature(cal_logits, art.calibration.labels)
            : 1.0;
    std::vector<Vec> cal_probs(cal_n);
    for (std::size_t i = 0; i < cal_n; ++i) {
      cal_probs[i] = softmax_scaled(cal_logits[i], art.temperature);
    }
    art.naive_cal =
        calibrate(ClsMethod::Naive, cal_probs, art.calibration.labels,
                  config.conformal.alpha, config.conformal.raps,
                  art.temperature);
    art.raps_cal =
        calibrate(ClsMethod::Raps, cal_probs, art.calibration.labels,
                  config.conformal.alpha, config.conformal.raps,
                  art.temperature);
    if (config.conformal.mc_calibration) {
      SoftmaxPredictor probs(&logits, art.temperature);
      const Rng cal_base(derive_seed(art.trial_seed, kCalibStream));
      std::vector<Vec> mc_probs(cal_n);
      for (std::size_t i = 0; i < cal_n; ++i) {
        Rng rng = cal_base.child(i);
        mc_probs[i] = adaptive_mc_dropout(probs, art.calibration.X[i],
                                          config.adaptive, rng)
                          .mean;
      }
      art.mccp_cal =
          calibrate(config.conformal.cls_method, mc_probs,
                    art.calibration.labels, config.conformal.alpha,
                    config.conformal.raps, art.temperature);
    } else {
      art.mccp_cal = config.conformal.cls_method == ClsMethod::Raps
                         ? art.raps_cal
                         : art.naive_cal;
    }
  } else {
    std::vector<QuantilePair> cal_pairs(cal_n);
    for (std::size_t i = 0; i < cal_n; ++i) {
      Vec p;
      logits.predict_deterministic(art.calibration.X[i], p);
      cal_pairs[i] = QuantilePair{p[0], p[1]};
    }
    const QuantileLevels levels{config.train.quantile_levels[0],
                                config.train.quantile_levels[1]};
    art.reg_cal = calibrate_reg(cal_pairs, art.calibration.y,
                                config.conformal.alpha, levels);
    if (config.conformal.mc_calibration) {
      const Rng cal_base(derive_seed(art.trial_seed, kCalibStream));
      std::vector<QuantilePair> mc_pairs(cal_n);
      for (std::size_t i = 0; i < cal_n; ++i) {
        Rng rng = cal_base.child(i);
        const AdaptiveResult res = adaptive_mc_dropout(
            logits, art.calibration.X[i], config.adaptive, rng);
        mc_pairs[i] = QuantilePair{res.mean[0], res.mean[1]};
      }
      art.mccp_reg_cal = calibrate_reg(mc_pairs, art.calibration.y,
                                       config.conformal.alpha, levels);
    } else {
      art.mccp_reg_cal = art.reg_cal;
    }
  }
  return art;
}

std::map<std::string, EvalReport> evaluate_methods(
    const ExperimentConfig& config, const TrialArtifacts& artifacts,
    const AdaptiveConfig& adaptive, std::vector<int>* mccp_passes) {
  const std::vector<std::string> methods = config.effective_methods();
  const bool need_mc =
      std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
        return m == "mc" || m == "mc-cp";
      }) ||
      mccp_passes != nullptr;
  const std::vector<SampleSlot> slots =
      compute_slots(config, artifacts, adaptive, need_mc);
  const std::size_t n = slots.size();

  if (mccp_passes != nullptr) {
    mccp_passes->clear();
    for (const auto& slot : slots) mccp_passes->push_back(slot.passes);
  }

  std::vector<int> det_passes(n, 1);
  std::vector<int> mc_pass_list(n, 1);
  for (std::size_t i = 0; i < n; ++i) mc_pass_list[i] = slots[i].passes;

  std::map<std::string, EvalReport> out;
  for (const std::string& method : methods) {
    if (config.task == Task::Classification) {
      std::vector<PredictionSet> sets(n);
      std::vector<Vec> probs(n);
      const bool mc_based = (method == "mc" || method == "mc-cp");
      for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = mc_based ? slots[i].mc_probs : slots[i].det_probs;
        probs[i] = p;
        if (method == "baseline" || method == "mc") {
          sets[i] = singleton_set(p);
        } else if (method == "naive") {
          sets[i] = naive_set(p, artifacts.naive_cal.threshold);
        } else if (method == "raps") {
          sets[i] = raps_set(p, artifacts.raps_cal.threshold,
                             artifacts.raps_cal.raps);
        } else {  // mc-cp
          sets[i] = config.conformal.cls_method == ClsMethod::Raps
                        ? raps_set(p, artifacts.mccp_cal.threshold,
                                   artifacts.mccp_cal.raps)
                        : naive_set(p, artifacts.mccp_cal.threshold);
        }
      }
      out[method] = classification_report(
          sets, artifacts.validation.labels, probs,
          mc_based ? mc_pass_list : det_passes, artifacts.num_classes);
    } else {
      std::vector<PredictionInterval> intervals(n);
      const bool mc_based = (method == "mc" || method == "mc-cp");
      const double q = method == "cqr"     ? artifacts.reg_cal.q_correction
                       : method == "mc-cp" ? artifacts.mccp_reg_cal.q_correction
                                           : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const QuantilePair& pair =
            mc_based ? slots[i].mc_pair : slots[i].det_pair;
        intervals[i] = cqr_interval(pair, q);
      }
      out[method] = regression_report(intervals, artifacts.validation.y,
                                      mc_based ? mc_pass_list : det_passes,
                                      MaeMode::Midpoint);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::ostream* log) {
  config.validate();
  ExperimentResult result;
  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(t));
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const TrialArtifacts artifacts = prepare_trial(config, t);
      const auto t1 = std::chrono::steady_clock::now();
      TrialResult trial;
      trial.trial_index = t;
      trial.seed = trial_seed;
      trial.reports = evaluate_methods(config, artifacts, config.adaptive);
      const auto t2 = std::chrono::steady_clock::now();
      if (log != nullptr) {
        const double train_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        const double eval_ms =
            std::chrono::duration<double, std::milli>(t2 - t1).count();
        const double per_pred =
            eval_ms / static_cast<double>(std::max<std::size_t>(
                          1, artifacts.validation.size()));
        (*log) << "[trial " << t << "] prepare+train " << train_ms
               << " ms, evaluate " << eval_ms << " ms ("
               << per_pred << " ms/input across methods)\n";
      }
      result.trials.push_back(std::move(trial));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(t) + " (seed " +
                               std::to_string(trial_seed) +
                               ") failed: " + e.what());
    }
  }
  return result;
}

std::vector<SensitivityCell> run_sensitivity(
    const ExperimentConfig& config, const std::vector<double>& delta_grid,
    const std::vector<int>& patience_grid, std::ostream* log) {
  config.validate();
  if (delta_grid.empty()) {
    throw ConfigError("delta_grid", "grid must not be empty");
  }
  if (patience_grid.empty()) {
    throw ConfigError("patience_grid", "grid must not be empty");
  }

  // Only the adaptive method reacts to (delta, patience); evaluate just it.
  ExperimentConfig probe = config;
  probe.methods = {"mc-cp"};

  struct Accum {
    double error_sum = 0.0;
    double size_sum = 0.0;
    double coverage_sum = 0.0;
    double pass_sum = 0.0;
    double pass_sq_sum = 0.0;
    std::size_t pass_count = 0;
  };
  std::vector<Accum> acc(delta_grid.size() * patience_grid.size());

  for (int t = 0; t < config.trials; ++t) {
    const TrialArtifacts artifacts = prepare_trial(probe, t);
    for (std::size_t di = 0; di < delta_grid.size(); ++di) {
      for (std::size_t pi = 0; pi < patience_grid.size(); ++pi) {
        AdaptiveConfig cell_cfg = config.adaptive;
        cell_cfg.delta = delta_grid[di];
        cell_cfg.patience = patience_grid[pi];
        std::vector<int> passes;
        const auto reports =
            evaluate_methods(probe, artifacts, cell_cfg, &passes);
        const EvalReport& rep = reports.at("mc-cp");
        Accum& a = acc[di * patience_grid.size() + pi];
        a.error_sum += config.task == Task::Classification
                           ? rep.test_error
                           : rep.mae.value_or(0.0);
        a.size_sum += rep.mean_size;
        a.coverage_sum += rep.coverage;
        for (int p : passes) {
          a.pass_sum += p;
          a.pass_sq_sum += static_cast<double>(p) * p;
          ++a.pass_count;
        }
        if (log != nullptr) {
          (*log) << "[sensitivity] trial " << t << " delta " << delta_grid[di]
                 << " patience " << patience_grid[pi] << " mean passes "
                 << rep.mean_passes << "\n";
        }
      }
    }
  }

  std::vector<SensitivityCell> cells;
  const double trials = static_cast<double>(config.trials);
  for (std::size_t di = 0; di < delta_grid.size(); ++di) {
    for (std::size_t pi = 0; pi < patience_grid.size(); ++pi) {
      const Accum& a = acc[di * patience_grid.size() + pi];
      SensitivityCell cell;
      cell.delta = delta_grid[di];
      cell.patience = patience_grid[pi];
      cell.mean_error = a.error_sum / trials;
      cell.mean_size = a.size_sum / trials;
      cell.coverage = a.coverage_sum / trials;
      const double n = static_cast<double>(a.pass_count);
      cell.mean_passes = a.pass_sum / n;
      cell.passes_stddev =
          std::sqrt(std::max(0.0, a.pass_sq_sum / n -
                                      cell.mean_passes * cell.mean_passes));
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<SampleTraceRow> trace_samples(
    const ExperimentConfig& config,
    const std::vector<std::size_t>& sample_ids) {
  config.validate();
  const TrialArtifacts artifacts = prepare_trial(config, 0);
  const Rng eval_base(derive_seed(artifacts.trial_seed, kEvalStream));

  std::vector<SampleTraceRow> rows;
  for (std::size_t id : sample_ids) {
    if (id >= artifacts.validation.size()) {
      throw std::invalid_argument(
          "unknown sample id " + std::to_string(id) + ": validation split has " +
          std::to_string(artifacts.validation.size()) + " samples");
    }
    MlpPredictor logits(&artifacts.net);
    std::vector<TraceRow> trace;
    Rng rng = eval_base.child(id);
    if (config.task == Task::Classification) {
      SoftmaxPredictor probs(&logits, artifacts.temperature);
      adaptive_mc_dropout(probs, artifacts.validation.X[id], config.adaptive,
                          rng, &trace);
    } else {
      adaptive_mc_dropout(logits, artifacts.validation.X[id], config.adaptive,
                          rng, &trace);
    }
    for (const TraceRow& row : trace) {
      rows.push_back(SampleTraceRow{id, row});
    }
  }
  return rows;
}

PlotdataTable quantile_plotdata(const ExperimentConfig& config) {
  config.validate();
  if (config.task != Task::Regression) {
    throw ConfigError("task", "plotdata requires task=regression");
  }
  const TrialArtifacts artifacts = prepare_trial(config, 0);
  const std::vector<std::string> methods = config.effective_methods();
  const bool need_mc = std::any_of(
      methods.begin(), methods.end(),
      [](const std::string& m) { return m == "mc" || m == "mc-cp"; });
  const std::vector<SampleSlot> slots =
      compute_slots(config, artifacts, config.adaptive, need_mc);

  PlotdataTable table;
  table.method_names = methods;
  const Normalizer& nz = artifacts.normalizer;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::vector<double> row;
    // First feature in original units; target likewise.
    row.push_back(artifacts.validation.X[i][0] * nz.feature_stddev[0] +
                  nz.feature_mean[0]);
    row.push_back(nz.inverse_target(artifacts.validation.y[i]));
    for (const std::string& method : methods) {
      const bool mc_based = (method == "mc" || method == "mc-cp");
      const QuantilePair& pair =
          mc_based ? slots[i].mc_pair : slots[i].det_pair;
      const double q = method == "cqr" ? artifacts.reg_cal.q_correction
                       : method == "mc-cp"
                           ? artifacts.mccp_reg_cal.q_correction
                           : 0.0;
      row.push_back(nz.inverse_target(pair.lo));
      row.push_back(nz.inverse_target(pair.hi));
      row.push_back(nz.inverse_target(pair.lo - q));
      row.push_back(nz.inverse_target(pair.hi + q));
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const std::vector<double>& a, const std::vector<double>& b) {
              return a[0] < b[0];
            });
  return table;
}

}  // namespace mccp
