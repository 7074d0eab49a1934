#include "kinspec/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <string>

#include "kinspec/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kinspec {

namespace {
int g_threads = 0;
}

int thread_count() {
    if (g_threads > 0) return g_threads;
    if (const char* env = std::getenv("KINSPEC_THREADS")) {
        int k = std::atoi(env);
        if (k > 0) return k;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int k) { g_threads = k; }

void parallel_for(int n, const std::function<void(int)>& body) {
#ifdef _OPENMP
    const int nt = thread_count();
    if (nt > 1 && n > 1) {
        std::exception_ptr err;
#pragma omp parallel for schedule(static) num_threads(nt)
        for (int i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return;
    }
#endif
    for (int i = 0; i < n; ++i) body(i);
}

}  // namespace kinspec
