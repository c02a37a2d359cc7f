#include "mccp/serde.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace mccp {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void reject_unknown_keys(const json& j, const std::string& prefix,
                         const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError(prefix.empty() ? it.key() : prefix + "." + it.key(),
                        "unknown field");
    }
  }
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

}  // namespace

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["task"] =
      config.task == Task::Classification ? "classification" : "regression";
  json d;
  d["kind"] = config.dataset.kind;
  if (config.dataset.kind == "csv") {
    d["path"] = config.dataset.path;
    d["target"] = config.dataset.target;
  } else {
    d["n"] = config.dataset.n;
    if (config.dataset.kind == "synth_blobs") {
      d["classes"] = config.dataset.classes;
      d["dim"] = config.dataset.dim;
      d["separation"] = config.dataset.separation;
    }
  }
  j["dataset"] = d;
  j["model"] = {{"hidden", config.hidden}, {"dropout", config.dropout}};
  json t;
  t["optimizer"] = config.train.optimizer.kind == OptimizerConfig::Kind::Adam
                       ? "adam"
                       : "sgd_momentum";
  t["lr"] = config.train.optimizer.lr;
  t["momentum"] = config.train.optimizer.momentum;
  t["batch_size"] = config.train.batch_size;
  t["epochs"] = config.train.epochs;
  if (config.task == Task::Regression) {
    t["quantile_levels"] = config.train.quantile_levels;
  }
  j["train"] = t;
  j["adaptive"] = {{"max_passes", config.adaptive.max_passes},
                   {"delta", config.adaptive.delta},
                   {"patience", config.adaptive.patience}};
  json c;
  c["alpha"] = config.conformal.alpha;
  if (config.task == Task::Classification) {
    c["method"] =
        config.conformal.cls_method == ClsMethod::Raps ? "raps" : "naive";
    c["lambda"] = config.conformal.raps.lambda;
    c["k_reg"] = config.conformal.raps.k_reg;
    c["temperature_scaling"] = config.conformal.temperature_scaling;
  }
  c["mc_calibration"] = config.conformal.mc_calibration;
  j["conformal"] = c;
  j["split"] = {
      {"test_fraction", config.split.test_fraction},
      {"calibration_fraction_of_test",
       config.split.calibration_fraction_of_test}};
  j["trials"] = config.trials;
  j["master_seed"] = config.master_seed;
  j["methods"] = config.effective_methods();
  j["exec"] = config.exec == ExecMode::Parallel ? "parallel" : "serial";
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("(root)", "expected a JSON object");
  reject_unknown_keys(j, "",
                      {"task", "dataset", "model", "train", "adaptive",
                       "conformal", "split", "trials", "master_seed",
                       "methods", "exec"});
  const json* task_j = find(j, "task");
  if (task_j == nullptr) throw ConfigError("task", "required field missing");
  const std::string task_s = get_string(*task_j, "task");
  ExperimentConfig config;
  if (task_s == "classification") {
    config.task = Task::Classification;
  } else if (task_s == "regression") {
    config.task = Task::Regression;
  } else {
    throw ConfigError("task", "expected 'classification' or 'regression'");
  }

  // Task-dependent defaults; explicit fields below override them.
  if (config.task == Task::Classification) {
    config.hidden = {128, 64};
    config.dropout = 0.5;
    config.train = TrainConfig::classification_defaults();
    config.split = SplitSpec::classification_defaults();
    config.conformal.alpha = 0.05;
    // Softmax sets are sensitive to the calibration/prediction pipeline
    // mismatch, so mc-cp calibrates exchangeably by default here.
    config.conformal.mc_calibration = true;
  } else {
    config.hidden = {64, 64};
    config.dropout = 0.25;
    config.train = TrainConfig::regression_defaults();
    config.split = SplitSpec::regression_defaults();
    config.conformal.alpha = 0.1;
    config.conformal.mc_calibration = false;
  }

  const json* d = find(j, "dataset");
  if (d == nullptr) throw ConfigError("dataset", "required field missing");
  if (!d->is_object()) throw ConfigError("dataset", "expected an object");
  reject_unknown_keys(*d, "dataset",
                      {"kind", "path", "target", "n", "classes", "dim",
                       "separation"});
  const json* kind = find(*d, "kind");
  if (kind == nullptr) {
    throw ConfigError("dataset.kind", "required field missing");
  }
  config.dataset.kind = get_string(*kind, "dataset.kind");
  if (const json* v = find(*d, "path")) {
    config.dataset.path = get_string(*v, "dataset.path");
  }
  if (const json* v = find(*d, "target")) {
    config.dataset.target = get_string(*v, "dataset.target");
  }
  if (const json* v = find(*d, "n")) {
    const std::int64_t n = get_integer(*v, "dataset.n");
    if (n < 1) throw ConfigError("dataset.n", "must be positive");
    config.dataset.n = static_cast<std::size_t>(n);
  }
  if (const json* v = find(*d, "classes")) {
    config.dataset.classes =
        static_cast<int>(get_integer(*v, "dataset.classes"));
  }
  if (const json* v = find(*d, "dim")) {
    const std::int64_t dim = get_integer(*v, "dataset.dim");
    if (dim < 1) throw ConfigError("dataset.dim", "must be positive");
    config.dataset.dim = static_cast<std::size_t>(dim);
  }
  if (const json* v = find(*d, "separation")) {
    config.dataset.separation = get_number(*v, "dataset.separation");
  }

  if (const json* m = find(j, "model")) {
    if (!m->is_object()) throw ConfigError("model", "expected an object");
    reject_unknown_keys(*m, "model", {"hidden", "dropout"});
    if (const json* v = find(*m, "hidden")) {
      if (!v->is_array()) throw ConfigError("model.hidden", "expected an array");
      config.hidden.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::int64_t w = get_integer(
            (*v)[i], "model.hidden[" + std::to_string(i) + "]");
        if (w < 1) {
          throw ConfigError("model.hidden[" + std::to_string(i) + "]",
                            "must be >= 1");
        }
        config.hidden.push_back(static_cast<std::size_t>(w));
      }
    }
    if (const json* v = find(*m, "dropout")) {
      config.dropout = get_number(*v, "model.dropout");
    }
  }

  if (const json* t = find(j, "train")) {
    if (!t->is_object()) throw ConfigError("train", "expected an object");
    reject_unknown_keys(*t, "train",
                        {"optimizer", "lr", "momentum", "batch_size", "epochs",
                         "quantile_levels"});
    if (const json* v = find(*t, "optimizer")) {
      const std::string kind_s = get_string(*v, "train.optimizer");
      if (kind_s == "adam") {
        config.train.optimizer = OptimizerConfig::adam(
            config.train.optimizer.lr);
      } else if (kind_s == "sgd_momentum") {
        config.train.optimizer = OptimizerConfig::sgd_momentum(
            config.train.optimizer.lr, config.train.optimizer.momentum);
      } else {
        throw ConfigError("train.optimizer",
                          "expected 'sgd_momentum' or 'adam'");
      }
    }
    if (const json* v = find(*t, "lr")) {
      config.train.optimizer.lr = get_number(*v, "train.lr");
    }
    if (const json* v = find(*t, "momentum")) {
      config.train.optimizer.momentum = get_number(*v, "train.momentum");
    }
    if (const json* v = find(*t, "batch_size")) {
      config.train.batch_size =
          static_cast<int>(get_integer(*v, "train.batch_size"));
    }
    if (const json* v = find(*t, "epochs")) {
      config.train.epochs =
          static_cast<int>(get_integer(*v, "train.epochs"));
    }
    if (const json* v = find(*t, "quantile_levels")) {
      if (!v->is_array() || v->size() != 2) {
        throw ConfigError("train.quantile_levels",
                          "expected an array of two levels");
      }
      config.train.quantile_levels = {
          get_number((*v)[0], "train.quantile_levels[0]"),
          get_number((*v)[1], "train.quantile_levels[1]")};
    }
  }

  if (const json* a = find(j, "adaptive")) {
    if (!a->is_object()) throw ConfigError("adaptive", "expected an object");
    reject_unknown_keys(*a, "adaptive", {"max_passes", "delta", "patience"});
    if (const json* v = find(*a, "max_passes")) {
      config.adaptive.max_passes =
          static_cast<int>(get_integer(*v, "adaptive.max_passes"));
    }
    if (const json* v = find(*a, "delta")) {
      config.adaptive.delta = get_number(*v, "adaptive.delta");
    }
    if (const json* v = find(*a, "patience")) {
      config.adaptive.patience =
          static_cast<int>(get_integer(*v, "adaptive.patience"));
    }
  }

  if (const json* c = find(j, "conformal")) {
    if (!c->is_object()) throw ConfigError("conformal", "expected an object");
    reject_unknown_keys(*c, "conformal",
                        {"method", "alpha", "lambda", "k_reg",
                         "temperature_scaling", "mc_calibration"});
    if (const json* v = find(*c, "method")) {
      const std::string method = get_string(*v, "conformal.method");
      if (method == "raps") {
        config.conformal.cls_method = ClsMethod::Raps;
      } else if (method == "naive") {
        config.conformal.cls_method = ClsMethod::Naive;
      } else {
        throw ConfigError("conformal.method", "expected 'naive' or 'raps'");
      }
    }
    if (const json* v = find(*c, "alpha")) {
      config.conformal.alpha = get_number(*v, "conformal.alpha");
    }
    if (const json* v = find(*c, "lambda")) {
      config.conformal.raps.lambda = get_number(*v, "conformal.lambda");
    }
    if (const json* v = find(*c, "k_reg")) {
      config.conformal.raps.k_reg =
          static_cast<int>(get_integer(*v, "conformal.k_reg"));
    }
    if (const json* v = find(*c, "temperature_scaling")) {
      config.conformal.temperature_scaling =
          get_bool(*v, "conformal.temperature_scaling");
    }
    if (const json* v = find(*c, "mc_calibration")) {
      config.conformal.mc_calibration =
          get_bool(*v, "conformal.mc_calibration");
    }
  }

  if (const json* s = find(j, "split")) {
    if (!s->is_object()) throw ConfigError("split", "expected an object");
    reject_unknown_keys(*s, "split",
                        {"test_fraction", "calibration_fraction_of_test"});
    if (const json* v = find(*s, "test_fraction")) {
      config.split.test_fraction = get_number(*v, "split.test_fraction");
    }
    if (const json* v = find(*s, "calibration_fraction_of_test")) {
      config.split.calibration_fraction_of_test =
          get_number(*v, "split.calibration_fraction_of_test");
    }
  }

  if (const json* v = find(j, "trials")) {
    config.trials = static_cast<int>(get_integer(*v, "trials"));
  }
  if (const json* v = find(j, "master_seed")) {
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      throw ConfigError("master_seed", "expected an integer");
    }
    config.master_seed = v->get<std::uint64_t>();
  }
  if (const json* v = find(j, "methods")) {
    if (!v->is_array()) throw ConfigError("methods", "expected an array");
    config.methods.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      config.methods.push_back(
          get_string((*v)[i], "methods[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(j, "exec")) {
    const std::string mode = get_string(*v, "exec");
    if (mode == "serial") {
      config.exec = ExecMode::Serial;
    } else if (mode == "parallel") {
      config.exec = ExecMode::Parallel;
    } else {
      throw ConfigError("exec", "expected 'serial' or 'parallel'");
    }
  }

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("(file)", "cannot open config '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", "invalid JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json report_to_json(const EvalReport& report) {
  json j;
  j["coverage"] = report.coverage;
  j["mean_size"] = report.mean_size;
  j["size_stddev"] = report.size_stddev;
  j["test_error"] = report.test_error;
  j["singleton_fraction"] = report.singleton_fraction;
  if (report.singleton_accuracy.has_value()) {
    j["singleton_accuracy"] = *report.singleton_accuracy;
  }
  if (report.mixed_accuracy.has_value()) {
    j["mixed_accuracy"] = *report.mixed_accuracy;
  }
  j["mean_top_confidence"] = report.mean_top_confidence;
  j["empty_count"] = report.empty_count;
  j["per_class_coverage"] = report.per_class_coverage;
  if (report.mae.has_value()) {
    j["mae"] = *report.mae;
  }
  j["mean_passes"] = report.mean_passes;
  return j;
}

json results_to_json(const ExperimentConfig& config,
                     const ExperimentResult& result) {
  json j;
  j["artifact_version"] = kArtifactVersion;
  j["config"] = config_to_json(config);
  json trials = json::array();
  for (const TrialResult& trial : result.trials) {
    json t;
    t["trial_index"] = trial.trial_index;
    t["seed"] = trial.seed;
    json reports;
    for (const auto& [method, report] : trial.reports) {
      reports[method] = report_to_json(report);
    }
    t["reports"] = reports;
    trials.push_back(t);
  }
  j["trials"] = trials;
  return j;
}

void write_results_json(const std::string& path,
                        const ExperimentConfig& config,
                        const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << results_to_json(config, result).dump(2) << '\n';
}

namespace {

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};

Stat over_trials(const ExperimentResult& result, const std::string& method,
                 double (*pick)(const EvalReport&)) {
  std::vector<double> values;
  for (const TrialResult& trial : result.trials) {
    values.push_back(pick(trial.reports.at(method)));
  }
  Stat s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
  return s;
}

}  // namespace

void write_table_csv(const std::string& path, const ExperimentConfig& config,
                     const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "# config=" << config_to_json(config).dump() << '\n';
  out << "method,test_error_mean,test_error_stddev,coverage_mean,"
         "coverage_stddev,mean_size_mean,mean_size_stddev,mean_passes_mean,"
         "mean_passes_stddev,mae_mean,mae_stddev\n";
  if (result.trials.empty()) return;
  for (const std::string& method : config.effective_methods()) {
    const Stat err = over_trials(result, method, [](const EvalReport& r) {
      return r.test_error;
    });
    const Stat cov = over_trials(result, method, [](const EvalReport& r) {
      return r.coverage;
    });
    const Stat size = over_trials(result, method, [](const EvalReport& r) {
      return r.mean_size;
    });
    const Stat passes = over_trials(result, method, [](const EvalReport& r) {
      return r.mean_passes;
    });
    out << method << ',' << fmt(err.mean) << ',' << fmt(err.stddev) << ','
        << fmt(cov.mean) << ',' << fmt(cov.stddev) << ',' << fmt(size.mean)
        << ',' << fmt(size.stddev) << ',' << fmt(passes.mean) << ','
        << fmt(passes.stddev);
    if (config.task == Task::Regression) {
      const Stat mae = over_trials(result, method, [](const EvalReport& r) {
        return r.mae.value_or(0.0);
      });
      out << ',' << fmt(mae.mean) << ',' << fmt(mae.stddev);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_sensitivity_csv(const std::string& path,
                           const ExperimentConfig& config,
                           const std::vector<SensitivityCell>& cells) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "# config=" << config_to_json(config).dump() << '\n';
  out << "delta,patience,mean_error,mean_passes,passes_stddev,mean_size,"
         "coverage\n";
  for (const SensitivityCell& cell : cells) {
    out << fmt(cell.delta) << ',' << cell.patience << ','
        << fmt(cell.mean_error) << ',' << fmt(cell.mean_passes) << ','
        << fmt(cell.passes_stddev) << ',' << fmt(cell.mean_size) << ','
        << fmt(cell.coverage) << '\n';
  }
}

void write_trace_csv(const std::string& path, const ExperimentConfig& config,
                     const std::vector<SampleTraceRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "# config=" << config_to_json(config).dump() << '\n';
  out << "sample,pass,dim,variance,diff,patience_count\n";
  for (const SampleTraceRow& r : rows) {
    out << r.sample_id << ',' << r.row.pass << ',' << r.row.dim << ','
        << fmt(r.row.variance) << ',' << fmt(r.row.diff) << ','
        << r.row.patience_count << '\n';
  }
}

void write_plotdata_csv(const std::string& path,
                        const ExperimentConfig& config,
                        const PlotdataTable& table) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "# config=" << config_to_json(config).dump() << '\n';
  out << "x,y";
  for (const std::string& m : table.method_names) {
    out << ',' << m << "_raw_lo," << m << "_raw_hi," << m << "_lo," << m
        << "_hi";
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << fmt(row[i]);
    }
    out << '\n';
  }
}

}  // namespace mccp
