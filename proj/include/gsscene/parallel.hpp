#pragma once

#include <cstddef>

namespace gsscene {

// Runs fn(i) for i in [0, n). Iterations must write disjoint outputs; the result is then
// independent of the worker count.
template <typename Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

}  // namespace gsscene
