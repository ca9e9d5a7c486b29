#include "uwiq/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uwiq::par {

namespace {
Mode g_mode = Mode::openmp;
}

Mode mode() noexcept { return g_mode; }

void set_mode(Mode m) noexcept { g_mode = m; }

void set_threads(int n) noexcept {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

bool openmp_available() noexcept {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

}  // namespace uwiq::par
