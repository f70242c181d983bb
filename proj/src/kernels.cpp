#include "portthermo/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace portthermo::kernels {

int available_threads() {
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return 1;
#endif
}

int effective_jobs(int requested) {
  const int avail = available_threads();
  return requested <= 0 ? avail : requested;
}

namespace detail {

void run_parallel(std::size_t count, int jobs, void (*body)(std::size_t, void*), void* ctx) {
  const auto n = static_cast<long long>(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
#endif
  for (long long i = 0; i < n; ++i) body(static_cast<std::size_t>(i), ctx);
  (void)jobs;
}

}  // namespace detail

}  // namespace portthermo::kernels
