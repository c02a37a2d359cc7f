#include "mccp/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mccp/rng.hpp"

namespace mccp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

// Parses one numeric cell; hex floats are accepted too. Returns false when
// the cell is empty, has trailing junk, or parses to a non-finite value.
bool parse_cell(const std::string& raw, double& out) {
  const std::string cell = trim(raw);
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + cell.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

}  // namespace

int TabularDataset::num_classes() const {
  int top = -1;
  for (int label : labels) top = std::max(top, label);
  return top + 1;
}

TabularDataset load_csv(const std::string& path,
                        const std::string& target_column, Task task) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_csv: '" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  std::size_t target_idx = header.size();
  TabularDataset ds;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == target_column) {
      target_idx = i;
    } else {
      ds.columns.push_back(name);
    }
  }
  if (target_idx == header.size()) {
    throw std::runtime_error("load_csv: target column '" + target_column +
                             "' not found in '" + path + "'");
  }
  ds.target_name = target_column;
  ds.is_classification = (task == Task::Classification);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      ds.warnings.push_back("row " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()) + "; row dropped");
      ++ds.dropped_rows;
      continue;
    }
    Vec row;
    row.reserve(header.size() - 1);
    double target = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) {
      double v = 0.0;
      if (!parse_cell(cells[i], v)) {
        ds.warnings.push_back("row " + std::to_string(line_no) + ", column '" +
                              trim(header[i]) + "': unparseable cell '" +
                              trim(cells[i]) + "'; row dropped");
        ok = false;
        break;
      }
      if (i == target_idx) {
        target = v;
      } else {
        row.push_back(v);
      }
    }
    if (ok && task == Task::Classification) {
      const double rounded = std::nearbyint(target);
      if (std::abs(target - rounded) > 1e-9 || rounded < 0.0) {
        ds.warnings.push_back("row " + std::to_string(line_no) + ", column '" +
                              target_column +
                              "': not a class index; row dropped");
        ok = false;
      } else {
        target = rounded;
      }
    }
    if (!ok) {
      ++ds.dropped_rows;
      continue;
    }
    ds.X.push_back(std::move(row));
    if (task == Task::Classification) {
      ds.labels.push_back(static_cast<int>(target));
    } else {
      ds.y.push_back(target);
    }
  }
  if (ds.X.empty()) {
    throw std::runtime_error("load_csv: no usable rows in '" + path + "'");
  }
  return ds;
}

void write_csv(const std::string& path, const TabularDataset& dataset) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open '" + path +
                             "' for writing");
  }
  for (const auto& c : dataset.columns) out << c << ',';
  out << dataset.target_name << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.X[i]) out << format_value(v) << ',';
    if (dataset.is_classification) {
      out << dataset.labels[i];
    } else {
      out << format_value(dataset.y[i]);
    }
    out << '\n';
  }
}

SplitIndices split(std::size_t n, const SplitSpec& spec) {
  if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0 ||
      spec.calibration_fraction_of_test <= 0.0 ||
      spec.calibration_fraction_of_test >= 1.0) {
    throw std::invalid_argument("split: fractions must lie in (0,1)");
  }
  const auto test_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.test_fraction));
  const auto cal_raw = static_cast<std::size_t>(std::llround(
      static_cast<double>(test_n) * spec.calibration_fraction_of_test));
  const std::size_t cal_n = std::max<std::size_t>(1, cal_raw);
  if (test_n < 2 || cal_n >= test_n || n <= test_n) {
    throw std::invalid_argument(
        "split: fractions produce an empty train, calibration or validation "
        "block for n = " +
        std::to_string(n));
  }
  const std::size_t val_n = test_n - cal_n;
  const std::size_t train_n = n - test_n;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + train_n);
  out.calibration.assign(order.begin() + train_n,
                         order.begin() + train_n + cal_n);
  out.validation.assign(order.begin() + train_n + cal_n, order.end());
  if (cal_n < 10) {
    out.warnings.push_back("degenerate calibration split: only " +
                           std::to_string(cal_n) +
                           " point(s); conformal thresholds will be coarse");
  }
  (void)val_n;
  return out;
}

TabularDataset subset(const TabularDataset& dataset,
                      const std::vector<std::size_t>& indices) {
  TabularDataset out;
  out.is_classification = dataset.is_classification;
  out.columns = dataset.columns;
  out.target_name = dataset.target_name;
  out.X.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= dataset.size()) {
      throw std::out_of_range("subset: index beyond dataset size");
    }
    out.X.push_back(dataset.X[idx]);
    if (dataset.is_classification) {
      out.labels.push_back(dataset.labels[idx]);
    } else {
      out.y.push_back(dataset.y[idx]);
    }
  }
  return out;
}

TabularDataset synth_blobs(std::size_t n, int num_classes, std::size_t dim,
                           double separation, std::uint64_t seed) {
  if (num_classes < 2 || dim < 2) {
    throw std::invalid_argument("synth_blobs: need >= 2 classes and dim >= 2");
  }
  if (n < static_cast<std::size_t>(num_classes) * 10) {
    throw std::invalid_argument("synth_blobs: need at least 10 points per class");
  }
  TabularDataset ds;
  ds.is_classification = true;
  ds.target_name = "label";
  for (std::size_t d = 0; d < dim; ++d) {
    ds.columns.push_back("f" + std::to_string(d));
  }
  Rng rng(seed);
  const double tau = 6.283185307179586476925286766559;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    const double angle = tau * static_cast<double>(c) /
                         static_cast<double>(num_classes);
    Vec x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = rng.next_normal();
    x[0] += separation * std::cos(angle);
    x[1] += separation * std::sin(angle);
    ds.X.push_back(std::move(x));
    ds.labels.push_back(c);
  }
  return ds;
}

TabularDataset synth_hetero(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("synth_hetero: need n >= 10");
  TabularDataset ds;
  ds.is_classification = false;
  ds.target_name = "y";
  ds.columns = {"x"};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.next_uniform(-2.0, 2.0);
    const double eps = rng.next_normal();
    const double y = std::sin(2.0 * x) + (0.1 + 0.4 * std::abs(x)) * eps;
    ds.X.push_back({x});
    ds.y.push_back(y);
  }
  return ds;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  }
  // Acklam's rational approximation, relative error ~1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  const double p_high = 1.0 - p_low;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > p_high) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double hetero_quantile_curve(double x, double level) {
  return std::sin(2.0 * x) + normal_quantile(level) * (0.1 + 0.4 * std::abs(x));
}

TabularDataset synth_concrete_like(std::size_t n, std::uint64_t seed) {
  if (n < 50) throw std::invalid_argument("synth_concrete_like: need n >= 50");
  TabularDataset ds;
  ds.is_classification = false;
  ds.target_name = "strength";
  ds.columns = {"cement",           "slag",       "fly_ash",  "water",
                "superplasticizer", "coarse_agg", "fine_agg", "age"};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double cement = rng.next_uniform(100.0, 550.0);
    const double slag = rng.next_double() < 0.40 ? 0.0
                                                 : rng.next_uniform(0.0, 360.0);
    const double ash = rng.next_double() < 0.45 ? 0.0
                                                : rng.next_uniform(0.0, 200.0);
    const double water = rng.next_uniform(120.0, 250.0);
    const double superplast =
        rng.next_double() < 0.30 ? 0.0 : rng.next_uniform(0.0, 32.0);
    const double coarse = rng.next_uniform(800.0, 1150.0);
    const double fine = rng.next_uniform(600.0, 1000.0);
    const double age =
        std::nearbyint(std::exp(rng.next_uniform(0.0, std::log(365.0))));

    const double agef = std::log1p(age) / std::log1p(365.0);
    const double binder = cement + 0.5 * slag + 0.3 * ash + 1.0;
    const double wb = water / binder;
    const double core = 120.0 * std::exp(-3.2 * wb);
    const double signal = core * (0.30 + 0.70 * agef) + 0.020 * slag * agef +
                          0.012 * ash * agef + 0.35 * superplast +
                          6.0 * std::sin(cement / 70.0) +
                          0.004 * (coarse - 975.0) + 0.003 * (fine - 800.0);
    const double sigma = 6.0 * (0.6 + 0.8 * agef);
    const double y = signal + sigma * rng.next_normal();

    ds.X.push_back({cement, slag, ash, water, superplast, coarse, fine, age});
    ds.y.push_back(y);
  }
  return ds;
}

Normalizer Normalizer::fit(const TabularDataset& dataset,
                           const std::vector<std::size_t>& train_indices,
                           bool standardize_targets) {
  if (train_indices.empty()) {
    throw std::invalid_argument("Normalizer::fit: empty training index list");
  }
  const std::size_t dim = dataset.dim();
  Normalizer nz;
  nz.feature_mean.assign(dim, 0.0);
  nz.feature_stddev.assign(dim, 0.0);
  const double n = static_cast<double>(train_indices.size());
  for (std::size_t idx : train_indices) {
    for (std::size_t d = 0; d < dim; ++d) nz.feature_mean[d] += dataset.X[idx][d];
  }
  for (std::size_t d = 0; d < dim; ++d) nz.feature_mean[d] /= n;
  for (std::size_t idx : train_indices) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = dataset.X[idx][d] - nz.feature_mean[d];
      nz.feature_stddev[d] += diff * diff;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    nz.feature_stddev[d] = std::sqrt(nz.feature_stddev[d] / n);
    if (nz.feature_stddev[d] == 0.0) nz.feature_stddev[d] = 1.0;
  }
  nz.standardize_targets = standardize_targets && !dataset.is_classification;
  if (nz.standardize_targets) {
    double mean = 0.0;
    for (std::size_t idx : train_indices) mean += dataset.y[idx];
    mean /= n;
    double sq = 0.0;
    for (std::size_t idx : train_indices) {
      const double diff = dataset.y[idx] - mean;
      sq += diff * diff;
    }
    nz.target_mean = mean;
    nz.target_stddev = std::sqrt(sq / n);
    if (nz.target_stddev == 0.0) nz.target_stddev = 1.0;
  }
  return nz;
}

Vec Normalizer::transform(const Vec& x) const {
  if (x.size() != feature_mean.size()) {
    throw std::invalid_argument("Normalizer: feature width mismatch");
  }
  Vec out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = (x[d] - feature_mean[d]) / feature_stddev[d];
  }
  return out;
}

double Normalizer::transform_target(double y) const {
  return standardize_targets ? (y - target_mean) / target_stddev : y;
}

double Normalizer::inverse_target(double y) const {
  return standardize_targets ? y * target_stddev + target_mean : y;
}

TabularDataset Normalizer::apply(const TabularDataset& dataset) const {
  TabularDataset out = dataset;
  for (auto& row : out.X) row = transform(row);
  if (standardize_targets && !dataset.is_classification) {
    for (auto& v : out.y) v = transform_target(v);
  }
  return out;
}

void write_replay(const std::string& path, const ReplayFile& replay) {
  if (replay.dim == 0) {
    throw std::invalid_argument("write_replay: zero output dimension");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_replay: cannot open '" + path +
                             "' for writing");
  }
  out << "# dim=" << replay.dim << " passes=" << replay.declared_passes
      << '\n';
  out << "sample_id,pass";
  for (std::size_t d = 0; d < replay.dim; ++d) out << ",dim" << d;
  out << '\n';
  for (const auto& [sample_id, passes] : replay.records) {
    for (std::size_t p = 0; p < passes.size(); ++p) {
      if (passes[p].size() != replay.dim) {
        throw std::invalid_argument(
            "write_replay: record width differs from declared dimension");
      }
      out << sample_id << ',' << p;
      for (double v : passes[p]) out << ',' << format_hex(v);
      out << '\n';
    }
  }
}

ReplayFile read_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_replay: cannot open '" + path + "'");
  }
  ReplayFile replay;
  std::string line;
  // Optional metadata comment, then the fixed column header.
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto ppos = line.find("passes=");
      if (ppos != std::string::npos) {
        replay.declared_passes = static_cast<std::size_t>(
            std::strtoull(line.c_str() + ppos + 7, nullptr, 10));
      }
      continue;
    }
    break;
  }
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 3 || trim(header[0]) != "sample_id" ||
      trim(header[1]) != "pass") {
    throw std::runtime_error("read_replay: malformed header in '" + path +
                             "'");
  }
  replay.dim = header.size() - 2;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("read_replay: row width mismatch in '" + path +
                               "'");
    }
    const int sample_id = std::atoi(cells[0].c_str());
    const auto pass = static_cast<std::size_t>(std::atoll(cells[1].c_str()));
    auto& passes = replay.records[sample_id];
    if (pass != passes.size()) {
      throw std::runtime_error(
          "read_replay: passes for sample " + std::to_string(sample_id) +
          " are not contiguous from zero");
    }
    Vec v(replay.dim);
    for (std::size_t d = 0; d < replay.dim; ++d) {
      double value = 0.0;
      if (!parse_cell(cells[2 + d], value)) {
        throw std::runtime_error("read_replay: unparseable value in '" + path +
                                 "'");
      }
      v[d] = value;
    }
    passes.push_back(std::move(v));
  }
  if (replay.records.empty()) {
    throw std::runtime_error("read_replay: no records in '" + path + "'");
  }
  return replay;
}

ReplayPredictor::ReplayPredictor(const ReplayFile* file, int sample_id)
    : file_(file), sample_id_(sample_id) {
  if (file_ == nullptr || file_->records.find(sample_id) ==
                              file_->records.end()) {
    throw std::invalid_argument("ReplayPredictor: sample " +
                                std::to_string(sample_id) +
                                " not present in replay file");
  }
}

std::size_t ReplayPredictor::output_dim() const { return file_->dim; }

void ReplayPredictor::predict_once(const Vec& /*x*/, Rng& /*rng*/,
                                   Vec& out) const {
  const auto& passes = file_->records.at(sample_id_);
  if (cursor_ >= passes.size()) {
    throw std::runtime_error(
        "replay exhausted for sample " + std::to_string(sample_id_) +
        " at pass " + std::to_string(cursor_));
  }
  out = passes[cursor_++];
}

void ReplayPredictor::predict_deterministic(const Vec& /*x*/, Vec& out) const {
  out = file_->records.at(sample_id_).front();
}

}  // namespace mccp
