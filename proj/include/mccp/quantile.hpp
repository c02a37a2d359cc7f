#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mccp {

// Sentinel returned when a requested order statistic lies beyond the sample.
// Callers interpret it as "include everything" (all classes / whole line).
inline constexpr double kInfiniteThreshold =
    std::numeric_limits<double>::infinity();

// Exact order statistic: the level_index-th smallest score (1-based), no
// interpolation. level_index > n yields the +infinity sentinel.
inline double empirical_quantile(const std::vector<double>& scores,
                                 std::size_t level_index) {
  if (scores.empty()) {
    throw std::invalid_argument("empirical_quantile: empty score list");
  }
  if (level_index < 1) {
    throw std::invalid_argument("empirical_quantile: index must be >= 1");
  }
  if (level_index > scores.size()) return kInfiniteThreshold;
  std::vector<double> work(scores);
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(level_index - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

// Finite-sample-corrected order-statistic index for split conformal
// calibration: ceil((n+1)(1-alpha)), 1-based. May exceed n for tiny
// calibration sets; empirical_quantile then degrades to the sentinel.
inline std::size_t conformal_index(std::size_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("conformal_index: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("conformal_index: alpha must lie in (0,1), got " +
                                std::to_string(alpha));
  }
  const double raw = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<std::size_t>(std::ceil(raw));
}

}  // namespace mccp
