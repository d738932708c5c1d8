#pragma once
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dlcast {

// Execution policy for data-parallel kernels. Serial is the reference path;
// Parallel must return bit-identical results for any thread count.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Runs body(i) for i in [0, n). Bodies must write disjoint state.
template <class F>
void parallel_for(std::size_t n, Exec exec, F&& body) {
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#endif
    (void)exec;
    for (std::size_t i = 0; i < n; ++i) body(i);
}

} // namespace dlcast
