#include "mccp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mccp {

namespace {

void require_lengths(std::size_t outputs, std::size_t truths,
                     const char* what) {
  if (outputs == 0) {
    throw std::invalid_argument(std::string(what) + ": empty input");
  }
  if (outputs != truths) {
    throw std::invalid_argument(std::string(what) +
                                ": outputs and truths differ in length");
  }
}

std::pair<double, double> mean_and_population_stddev(
    const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / n)};
}

}  // namespace

double coverage(const std::vector<PredictionSet>& sets,
                const std::vector<int>& truths) {
  require_lengths(sets.size(), truths.size(), "coverage");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].contains(truths[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

double coverage(const std::vector<PredictionInterval>& intervals,
                const std::vector<double>& truths) {
  require_lengths(intervals.size(), truths.size(), "coverage");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].contains(truths[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

std::pair<double, double> mean_size(const std::vector<PredictionSet>& sets) {
  if (sets.empty()) throw std::invalid_argument("mean_size: empty input");
  std::vector<double> sizes;
  sizes.reserve(sets.size());
  for (const auto& s : sets) sizes.push_back(static_cast<double>(s.size()));
  return mean_and_population_stddev(sizes);
}

std::pair<double, double> mean_size(
    const std::vector<PredictionInterval>& intervals) {
  if (intervals.empty()) throw std::invalid_argument("mean_size: empty input");
  std::vector<double> widths;
  widths.reserve(intervals.size());
  for (const auto& iv : intervals) widths.push_back(iv.width());
  return mean_and_population_stddev(widths);
}

SingletonStats singleton_stats(const std::vector<PredictionSet>& sets,
                               const std::vector<int>& truths) {
  require_lengths(sets.size(), truths.size(), "singleton_stats");
  std::size_t singletons = 0, singleton_hits = 0;
  std::size_t mixed = 0, mixed_hits = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].size() == 1) {
      ++singletons;
      if (sets[i].contains(truths[i])) ++singleton_hits;
    } else {
      // Larger sets and empty sets alike; empty ones can never hit.
      ++mixed;
      if (sets[i].contains(truths[i])) ++mixed_hits;
    }
  }
  SingletonStats stats;
  stats.singleton_fraction =
      static_cast<double>(singletons) / static_cast<double>(sets.size());
  if (singletons > 0) {
    stats.singleton_accuracy =
        static_cast<double>(singleton_hits) / static_cast<double>(singletons);
  }
  if (mixed > 0) {
    stats.mixed_accuracy =
        static_cast<double>(mixed_hits) / static_cast<double>(mixed);
  }
  return stats;
}

double mean_top_confidence(const std::vector<Vec>& mean_probs) {
  if (mean_probs.empty()) {
    throw std::invalid_argument("mean_top_confidence: empty input");
  }
  double total = 0.0;
  for (const auto& p : mean_probs) {
    if (p.empty()) {
      throw std::invalid_argument("mean_top_confidence: empty vector");
    }
    total += *std::max_element(p.begin(), p.end());
  }
  return total / static_cast<double>(mean_probs.size());
}

MaeResult regression_mae(const std::vector<PredictionInterval>& intervals,
                         const std::vector<double>& truths, MaeMode mode) {
  require_lengths(intervals.size(), truths.size(), "regression_mae");
  MaeResult result;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (iv.empty) {
      ++result.excluded;
      continue;
    }
    if (mode == MaeMode::Midpoint) {
      total += std::abs(0.5 * (iv.lo + iv.hi) - truths[i]);
    } else {
      total += 0.5 * (std::abs(iv.lo - truths[i]) + std::abs(iv.hi - truths[i]));
    }
    ++used;
  }
  if (used == 0) {
    throw std::invalid_argument("regression_mae: every interval is empty");
  }
  result.mae = total / static_cast<double>(used);
  return result;
}

std::vector<double> per_class_coverage(const std::vector<PredictionSet>& sets,
                                       const std::vector<int>& truths,
                                       int num_classes) {
  require_lengths(sets.size(), truths.size(), "per_class_coverage");
  if (num_classes < 1) {
    throw std::invalid_argument("per_class_coverage: need at least one class");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> hits(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const int y = truths[i];
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("per_class_coverage: label out of range");
    }
    ++counts[static_cast<std::size_t>(y)];
    if (sets[i].contains(y)) ++hits[static_cast<std::size_t>(y)];
  }
  std::vector<double> out(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (counts[c] > 0) {
      out[c] = static_cast<double>(hits[c]) / static_cast<double>(counts[c]);
    }
  }
  return out;
}

EvalReport classification_report(const std::vector<PredictionSet>& sets,
                                 const std::vector<int>& truths,
                                 const std::vector<Vec>& mean_probs,
                                 const std::vector<int>& passes,
                                 int num_classes) {
  EvalReport report;
  report.coverage = coverage(sets, truths);
  report.test_error = 1.0 - report.coverage;
  const auto size = mean_size(sets);
  report.mean_size = size.first;
  report.size_stddev = size.second;
  const SingletonStats stats = singleton_stats(sets, truths);
  report.singleton_fraction = stats.singleton_fraction;
  report.singleton_accuracy = stats.singleton_accuracy;
  report.mixed_accuracy = stats.mixed_accuracy;
  report.mean_top_confidence = mean_top_confidence(mean_probs);
  for (const auto& s : sets) {
    if (s.classes.empty()) ++report.empty_count;
  }
  report.per_class_coverage = per_class_coverage(sets, truths, num_classes);
  double pass_total = 0.0;
  for (int p : passes) pass_total += static_cast<double>(p);
  report.mean_passes =
      passes.empty() ? 0.0 : pass_total / static_cast<double>(passes.size());
  return report;
}

EvalReport regression_report(const std::vector<PredictionInterval>& intervals,
                             const std::vector<double>& truths,
                             const std::vector<int>& passes, MaeMode mode) {
  EvalReport report;
  report.coverage = coverage(intervals, truths);
  report.test_error = 1.0 - report.coverage;
  const auto size = mean_size(intervals);
  report.mean_size = size.first;
  report.size_stddev = size.second;
  for (const auto& iv : intervals) {
    if (iv.empty) ++report.empty_count;
  }
  const MaeResult mae = regression_mae(intervals, truths, mode);
  report.mae = mae.mae;
  double pass_total = 0.0;
  for (int p : passes) pass_total += static_cast<double>(p);
  report.mean_passes =
      passes.empty() ? 0.0 : pass_total / static_cast<double>(passes.size());
  return report;
}

}  // namespace mccp
