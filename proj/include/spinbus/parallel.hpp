#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>

#ifdef SPINBUS_USE_OPENMP
#include <omp.h>
#endif

namespace spinbus {

// Global worker count for the parallel kernels.  0 means "use the OpenMP
// default".  Sweep results are always written into index-addressed slots,
// so the outputs do not depend on this setting.
inline std::atomic<int>& max_threads_slot() {
  static std::atomic<int> slot{0};
  return slot;
}

inline void set_max_threads(int n) { max_threads_slot().store(n < 0 ? 0 : n); }

inline int max_threads() {
  int n = max_threads_slot().load();
  if (n > 0) return n;
#ifdef SPINBUS_USE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// OpenMP-parallel index loop. body(i) must be independent across i.
/// The first exception thrown by any task is captured and rethrown on
/// the calling thread once the loop has drained.
template <typename Body>
void parallel_for(std::int64_t n, Body&& body) {
#ifdef SPINBUS_USE_OPENMP
  const int threads = max_threads();
  if (threads > 1 && n > 1) {
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(spinbus_parallel_for_error)
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

/// Serial reference loop, kept alongside the parallel kernel for testing.
template <typename Body>
void serial_for(std::int64_t n, Body&& body) {
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace spinbus
