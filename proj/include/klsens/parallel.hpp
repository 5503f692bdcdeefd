#pragma once

#include <cstddef>
#include <functional>

namespace klsens::par {

/// Execution policy for data-parallel kernels.  Every kernel in this library
/// computes per-index partial results and combines them in index order, so
/// serial and parallel execution produce bitwise identical output; the policy
/// only changes scheduling.
struct Policy {
  bool parallel = true;
  int threads = 0;  // 0 keeps the OpenMP runtime default

  static Policy serial() { return {false, 1}; }
  static Policy omp(int threads = 0) { return {true, threads}; }
};

/// Process-wide default policy (set from --threads in the CLI).
Policy policy();
void set_policy(Policy p);

bool openmp_enabled();
int effective_threads(const Policy& p);

/// Run body(i) for i in [0, n).  The body must communicate only through
/// slot i of preallocated storage; iteration order is unspecified.
void for_indexed(std::size_t n, const Policy& p, const std::function<void(std::size_t)>& body);
void for_indexed(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace klsens::par
