#pragma once

#ifdef TAXOFORGE_HAVE_OPENMP
#include <omp.h>
#endif

namespace taxoforge {

// Numeric kernels (EM steps, combination scoring) come in two variants:
// a plain serial implementation kept as the reference, and an OpenMP one.
// Reductions in the OpenMP paths are blocked so results do not depend on
// the thread count.
enum class ExecMode { Serial, OpenMP };

inline ExecMode default_exec_mode() {
#ifdef TAXOFORGE_HAVE_OPENMP
    return ExecMode::OpenMP;
#else
    return ExecMode::Serial;
#endif
}

inline int hardware_threads() {
#ifdef TAXOFORGE_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace taxoforge
