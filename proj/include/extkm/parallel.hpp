#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace extkm::par {

/// Thread budget: min(EXTKM_THREADS, hardware) when the env var is set
/// and positive, otherwise all hardware threads. 1 when OpenMP is off.
inline int max_threads() {
#ifdef _OPENMP
  static const int cached = [] {
    int hw = omp_get_max_threads();
    if (const char* env = std::getenv("EXTKM_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1 && v < hw) return static_cast<int>(v);
      if (v >= hw) return hw;
    }
    return hw;
  }();
  return cached;
#else
  return 1;
#endif
}

/// Reference loop. The parallel kernels must produce bit-identical
/// results to this one; the test suite and the bench tool compare them.
template <typename Fn>
void for_index_serial(std::int64_t n, Fn&& fn) {
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

/// Data-parallel loop over [0,n). fn(i) must only write to slots owned
/// by index i; aggregation happens after the loop in index order.
template <typename Fn>
void for_index(std::int64_t n, Fn&& fn) {
#ifdef _OPENMP
  const int nt = max_threads();
  if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for_index_serial(n, fn);
}

/// Pairwise summation in fixed index order; the result does not depend
/// on thread count and loses fewer digits than a running sum.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v));
}

} // namespace extkm::par
