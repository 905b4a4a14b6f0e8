#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lpgd {

// Runs fn(i) for i in [0, count). workers <= 1 selects the serial reference
// path; otherwise iterations are distributed statically over OpenMP threads.
// Each index must write only to its own output slot, which keeps results
// identical for every worker count.
template <typename Fn>
void parallel_for(std::ptrdiff_t count, int workers, Fn&& fn) {
  if (workers <= 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
#else
  for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
#endif
}

inline int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lpgd
