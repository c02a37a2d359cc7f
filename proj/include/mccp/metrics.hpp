#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mccp/types.hpp"

namespace mccp {

// Evaluation summary for one method on one trial. Classification fills the
// set-related fields; regression fills mae and reuses mean_size/size_stddev
// for interval widths. test_error is always 1 - coverage under the same
// counting rule (empty sets and intervals are misses).
struct EvalReport {
  double coverage = 0.0;
  double mean_size = 0.0;
  double size_stddev = 0.0;
  double test_error = 0.0;
  double singleton_fraction = 0.0;
  std::optional<double> singleton_accuracy;  // absent when no singletons
  std::optional<double> mixed_accuracy;      // absent when no multi/empty sets
  double mean_top_confidence = 0.0;
  std::int64_t empty_count = 0;
  std::vector<double> per_class_coverage;  // classes with no samples report 0
  std::optional<double> mae;               // regression only
  double mean_passes = 0.0;
};

// Fraction of samples whose prediction contains the truth; empty outputs are
// misses. Throws on length mismatch or empty input.
double coverage(const std::vector<PredictionSet>& sets,
                const std::vector<int>& truths);
double coverage(const std::vector<PredictionInterval>& intervals,
                const std::vector<double>& truths);

// Mean and population standard deviation of the set cardinalities or
// interval widths (empty intervals contribute width zero).
std::pair<double, double> mean_size(const std::vector<PredictionSet>& sets);
std::pair<double, double> mean_size(
    const std::vector<PredictionInterval>& intervals);

struct SingletonStats {
  double singleton_fraction = 0.0;
  std::optional<double> singleton_accuracy;
  std::optional<double> mixed_accuracy;
};

// Decisiveness diagnostics: how often the set is a single class, and the
// truth-containment rate conditioned on singleton vs. larger sets. Empty
// sets are grouped with the mixed sets and always count as misses there.
SingletonStats singleton_stats(const std::vector<PredictionSet>& sets,
                               const std::vector<int>& truths);

// Mean over samples of the largest probability entry.
double mean_top_confidence(const std::vector<Vec>& mean_probs);

enum class MaeMode { Midpoint, PerQuantile };

struct MaeResult {
  double mae = 0.0;
  std::int64_t excluded = 0;  // empty intervals left out of the average
};

// Midpoint mode: mean |(lo+hi)/2 - y|. PerQuantile mode: mean over both
// edges of |edge - y|. Empty intervals are excluded and counted; throws if
// nothing usable remains.
MaeResult regression_mae(const std::vector<PredictionInterval>& intervals,
                         const std::vector<double>& truths, MaeMode mode);

// Containment rate per true class; classes that never appear report 0 and
// carry zero weight in the coverage decomposition.
std::vector<double> per_class_coverage(const std::vector<PredictionSet>& sets,
                                       const std::vector<int>& truths,
                                       int num_classes);

// Assembled reports used by the experiment driver.
EvalReport classification_report(const std::vector<PredictionSet>& sets,
                                 const std::vector<int>& truths,
                                 const std::vector<Vec>& mean_probs,
                                 const std::vector<int>& passes,
                                 int num_classes);
EvalReport regression_report(const std::vector<PredictionInterval>& intervals,
                             const std::vector<double>& truths,
                             const std::vector<int>& passes, MaeMode mode);

}  // namespace mccp
