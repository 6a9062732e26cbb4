#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reparam {

// Worker cap shared by all parallel kernels. 0 means "use the OpenMP default".
// The CLI sets this from REPARAM_THREADS. Results never depend on the cap:
// kernels fill per-element buffers in parallel and reduce serially.
int thread_cap();
void set_thread_cap(int cap);
void apply_thread_cap_from_env();

inline int effective_threads() {
#ifdef _OPENMP
    const int cap = thread_cap();
    const int hw = omp_get_max_threads();
    return (cap > 0 && cap < hw) ? cap : hw;
#else
    return 1;
#endif
}

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
    const int nt = effective_threads();
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        // exceptions must not unwind out of the omp region
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(reparam_parallel_for_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace reparam
