#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccp {

// Execution mode for the per-sample evaluation loops. Serial is the
// reference implementation; Parallel distributes iterations over OpenMP
// threads. Every loop body writes only to its own output slot and derives
// its randomness from the iteration index, never from shared state, so both
// modes produce bit-identical results.
enum class ExecMode { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for every i in [0, n). Bodies must not throw in Parallel
// mode; capture failures into the slot and rethrow after the loop instead.
template <typename Body>
void for_each_index(std::size_t n, ExecMode mode, Body&& body) {
  if (mode == ExecMode::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
#else
    // Without OpenMP the parallel mode degrades to the reference loop.
#endif
  }
  for (std::size_t i = 0; i < n; ++i) {
    body(i);
  }
}

}  // namespace mccp
