#include "detail/vecmath.hpp"

#include <cmath>

#if defined(__x86_64__) && defined(__GLIBC__)
#include <immintrin.h>
#define KAKULAB_HAVE_MVEC 1
extern "C" __m256d _ZGVdN4v_log(__m256d);
extern "C" __m256d _ZGVdN4v_exp(__m256d);
#endif

namespace kakulab::detail {

namespace {

#ifdef KAKULAB_HAVE_MVEC
bool has_avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

__attribute__((target("avx2,fma"))) std::size_t log_avx2(const double* x, double* y, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(y + k, _ZGVdN4v_log(_mm256_loadu_pd(x + k)));
  return k;
}

__attribute__((target("avx2,fma"))) std::size_t exp_avx2(double g, const double* x, double* y, std::size_t n) {
  const __m256d vg = _mm256_set1_pd(g);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(y + k, _ZGVdN4v_exp(_mm256_mul_pd(vg, _mm256_loadu_pd(x + k))));
  return k;
}
#endif

}  // namespace

void log_array(const double* x, double* y, std::size_t n) {
  std::size_t k = 0;
#ifdef KAKULAB_HAVE_MVEC
  if (has_avx2()) k = log_avx2(x, y, n);
#endif
  for (; k < n; ++k) y[k] = std::log(x[k]);
}

void exp_scaled_array(double g, const double* x, double* y, std::size_t n) {
  std::size_t k = 0;
#ifdef KAKULAB_HAVE_MVEC
  if (has_avx2()) k = exp_avx2(g, x, y, n);
#endif
  for (; k < n; ++k) y[k] = std::exp(g * x[k]);
}

}  // namespace kakulab::detail
