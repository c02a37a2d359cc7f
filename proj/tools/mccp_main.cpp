// Command-line benchmark harness for adaptive Monte Carlo dropout with
// conformal prediction. Subcommands:
//
//   run          train + calibrate + evaluate, write results.json / table.csv
//   sensitivity  sweep the adaptive-termination grid, write CSV
//   trace        per-pass convergence log for selected validation samples
//   plotdata     quantile-band plot data (regression runs)
//   synth        generate a synthetic dataset as CSV
//   gradcheck    finite-difference check of the network gradients
//
// Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mccp/dataset.hpp"
#include "mccp/experiment.hpp"
#include "mccp/mlp.hpp"
#include "mccp/rng.hpp"
#include "mccp/serde.hpp"

namespace {

using namespace mccp;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::vector<std::string> methods;
  std::string exec;
};

void add_common(CLI::App* cmd, CommonOpts* opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts->config_path,
                            "experiment config JSON file")
                ->check(CLI::ExistingFile);
  if (config_required) c->required();
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--seed", opts->seed, "override the config's master seed")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  cmd->add_option("--trials", opts->trials, "override the number of trials");
  cmd->add_option("--methods", opts->methods,
                  "comma-separated method subset to evaluate")
      ->delimiter(',');
  cmd->add_option("--exec", opts->exec, "execution mode")
      ->check(CLI::IsMember({"serial", "parallel"}));
}

ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  ExperimentConfig config = load_config(opts.config_path);
  if (opts.seed_set) config.master_seed = opts.seed;
  if (opts.trials > 0) config.trials = opts.trials;
  if (!opts.methods.empty()) config.methods = opts.methods;
  if (opts.exec == "serial") config.exec = ExecMode::Serial;
  if (opts.exec == "parallel") config.exec = ExecMode::Parallel;
  config.validate();
  return config;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_run(const CommonOpts& opts) {
  const ExperimentConfig config = load_with_overrides(opts);
  std::filesystem::create_directories(opts.out_dir);
  const ExperimentResult result = run_experiment(config, &std::cout);
  const std::string results_path = join_path(opts.out_dir, "results.json");
  const std::string table_path = join_path(opts.out_dir, "table.csv");
  write_results_json(results_path, config, result);
  write_table_csv(table_path, config, result);

  std::cout << "\nmethod summary over " << result.trials.size()
            << " trial(s):\n";
  for (const std::string& method : config.effective_methods()) {
    double cov = 0.0, size = 0.0, passes = 0.0;
    for (const TrialResult& t : result.trials) {
      const EvalReport& r = t.reports.at(method);
      cov += r.coverage;
      size += r.mean_size;
      passes += r.mean_passes;
    }
    const double k = static_cast<double>(result.trials.size());
    std::printf("  %-8s coverage %.4f  mean size %.4f  mean passes %.2f\n",
                method.c_str(), cov / k, size / k, passes / k);
  }
  std::cout << "wrote " << results_path << " and " << table_path << "\n";
  return 0;
}

int cmd_sensitivity(const CommonOpts& opts, std::vector<double> deltas,
                    std::vector<int> patiences) {
  const ExperimentConfig config = load_with_overrides(opts);
  std::filesystem::create_directories(opts.out_dir);
  const std::vector<SensitivityCell> cells =
      run_sensitivity(config, deltas, patiences, &std::cout);
  const std::string path = join_path(opts.out_dir, "sensitivity.csv");
  write_sensitivity_csv(path, config, cells);
  std::cout << "wrote " << path << " (" << cells.size() << " cells)\n";
  return 0;
}

int cmd_trace(const CommonOpts& opts, const std::vector<std::size_t>& ids) {
  const ExperimentConfig config = load_with_overrides(opts);
  std::filesystem::create_directories(opts.out_dir);
  const std::vector<SampleTraceRow> rows = trace_samples(config, ids);
  const std::string path = join_path(opts.out_dir, "trace.csv");
  write_trace_csv(path, config, rows);
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_plotdata(const CommonOpts& opts) {
  const ExperimentConfig config = load_with_overrides(opts);
  std::filesystem::create_directories(opts.out_dir);
  const PlotdataTable table = quantile_plotdata(config);
  const std::string path = join_path(opts.out_dir, "plotdata.csv");
  write_plotdata_csv(path, config, table);
  std::cout << "wrote " << path << " (" << table.rows.size() << " rows, "
            << table.method_names.size() << " methods)\n";
  return 0;
}

int cmd_synth(const std::string& kind, std::size_t n, int classes,
              std::size_t dim, double separation, std::uint64_t seed,
              const std::string& out_file) {
  TabularDataset ds;
  if (kind == "blobs") {
    ds = synth_blobs(n, classes, dim, separation, seed);
  } else if (kind == "hetero") {
    ds = synth_hetero(n, seed);
  } else if (kind == "concrete_like") {
    ds = synth_concrete_like(n, seed);
  } else {
    throw ConfigError("--kind",
                      "expected 'blobs', 'hetero' or 'concrete_like'");
  }
  const std::filesystem::path parent =
      std::filesystem::path(out_file).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  write_csv(out_file, ds);
  std::cout << "wrote " << out_file << " (" << ds.size() << " rows, "
            << ds.dim() << " features, target '" << ds.target_name << "')\n";
  return 0;
}

// Finite-difference gradient verification on freshly initialized networks:
// a softmax classifier under cross-entropy and a two-headed quantile
// regressor under pinball loss. Fails (exit 3) if any relative error
// exceeds the tolerance.
int cmd_gradcheck(std::uint64_t seed) {
  const double tol = 1e-4;
  int failures = 0;

  {
    Rng rng(derive_seed(seed, 11));
    MlpSpec spec;
    spec.layer_widths = {5, 8, 4};
    spec.head = Head::Softmax;
    spec.dropout_rate = 0.0;
    const Mlp net = init_mlp(spec, rng);
    std::vector<Vec> X(3, Vec(5));
    std::vector<int> labels;
    for (auto& x : X) {
      for (auto& v : x) v = rng.next_normal();
      labels.push_back(static_cast<int>(rng.next_below(4)));
    }
    const double err = grad_check_classifier(net, X, labels);
    std::printf("classification grad check: max relative error %.3e (tol %g)\n",
                err, tol);
    if (!(err <= tol)) ++failures;
  }
  {
    Rng rng(derive_seed(seed, 12));
    MlpSpec spec;
    spec.layer_widths = {4, 6, 2};
    spec.head = Head::Identity;
    spec.dropout_rate = 0.0;
    const Mlp net = init_mlp(spec, rng);
    std::vector<Vec> X(3, Vec(4));
    Vec targets(3);
    for (std::size_t i = 0; i < X.size(); ++i) {
      for (auto& v : X[i]) v = rng.next_normal();
      targets[i] = rng.next_normal();
    }
    const double err = grad_check_regressor(net, X, targets, {0.05, 0.95});
    std::printf("regression grad check: max relative error %.3e (tol %g)\n",
                err, tol);
    if (!(err <= tol)) ++failures;
  }

  if (failures > 0) {
    std::cerr << "gradient check FAILED\n";
    return 3;
  }
  std::cout << "gradient check passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mccp: adaptive Monte Carlo dropout + conformal prediction benchmark"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "train, calibrate and evaluate");
  add_common(run, &run_opts, true);

  CommonOpts sens_opts;
  std::vector<double> deltas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<int> patiences = {1, 10, 100};
  CLI::App* sens = app.add_subcommand(
      "sensitivity", "sweep adaptive-termination settings");
  add_common(sens, &sens_opts, true);
  sens->add_option("--deltas", deltas, "variance-change thresholds to sweep")
      ->delimiter(',');
  sens->add_option("--patiences", patiences, "patience values to sweep")
      ->delimiter(',');

  CommonOpts trace_opts;
  std::vector<std::size_t> trace_ids;
  CLI::App* trace = app.add_subcommand(
      "trace", "per-pass convergence log for validation samples");
  add_common(trace, &trace_opts, true);
  trace->add_option("--samples", trace_ids,
                    "validation sample indices to trace")
      ->delimiter(',');

  CommonOpts plot_opts;
  CLI::App* plot = app.add_subcommand(
      "plotdata", "quantile band plot data (regression)");
  add_common(plot, &plot_opts, true);

  std::string synth_kind = "blobs";
  std::size_t synth_n = 1000;
  int synth_classes = 3;
  std::size_t synth_dim = 2;
  double synth_sep = 1.6;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "synth.csv";
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic CSV");
  synth->add_option("--kind", synth_kind, "blobs | hetero | concrete_like")
      ->check(CLI::IsMember({"blobs", "hetero", "concrete_like"}));
  synth->add_option("--n", synth_n, "number of rows");
  synth->add_option("--classes", synth_classes, "class count (blobs)");
  synth->add_option("--dim", synth_dim, "feature count (blobs)");
  synth->add_option("--separation", synth_sep, "cluster separation (blobs)");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path");

  std::uint64_t grad_seed = 7;
  CLI::App* grad =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  grad->add_option("--seed", grad_seed, "seed for the random nets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sens->parsed()) return cmd_sensitivity(sens_opts, deltas, patiences);
    if (trace->parsed()) return cmd_trace(trace_opts, trace_ids);
    if (plot->parsed()) return cmd_plotdata(plot_opts);
    if (synth->parsed()) {
      return cmd_synth(synth_kind, synth_n, synth_classes, synth_dim,
                       synth_sep, synth_seed, synth_out);
    }
    if (grad->parsed()) return cmd_gradcheck(grad_seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
