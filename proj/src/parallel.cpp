#include "klsens/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace klsens::par {

namespace {
Policy g_policy{};
}

Policy policy() { return g_policy; }
void set_policy(Policy p) { g_policy = p; }

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int effective_threads(const Policy& p) {
  if (!p.parallel) return 1;
#ifdef _OPENMP
  return p.threads > 0 ? p.threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void for_indexed(std::size_t n, const Policy& p,
                 const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (p.parallel && n > 1) {
    const int threads = effective_threads(p);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)p;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

void for_indexed(std::size_t n, const std::function<void(std::size_t)>& body) {
  for_indexed(n, g_policy, body);
}

}  // namespace klsens::par
