#include <immintrin.h>

#include "prsbc/kernels.hpp"

namespace prsbc::kernels::detail {

namespace {

// Comparison mask -> number of set lanes.
inline std::size_t lanes_set(__m256d mask) {
  return static_cast<std::size_t>(
      __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
}

}  // namespace

std::size_t count_outside_radius_avx2(std::span<const double* const> dx,
                                      std::size_t n, double r2) {
  const __m256d threshold = _mm256_set1_pd(r2);
  const std::size_t vec_end = n - n % 4;
  std::size_t count = 0;
  for (std::size_t k = 0; k < vec_end; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (const double* axis : dx) {
      const __m256d d = _mm256_loadu_pd(axis + k);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    count += lanes_set(_mm256_cmp_pd(acc, threshold, _CMP_GE_OQ));
  }
  return count + count_outside_radius_scalar(dx, vec_end, n, r2);
}

std::size_t count_barrier_satisfied_avx2(std::span<const double* const> dx,
                                         std::span<const double* const> dw,
                                         std::span<const double> velocity,
                                         double two_over_gamma, double r2,
                                         std::size_t n) {
  const __m256d threshold = _mm256_set1_pd(r2);
  const __m256d scale = _mm256_set1_pd(two_over_gamma);
  const std::size_t vec_end = n - n % 4;
  std::size_t count = 0;
  for (std::size_t k = 0; k < vec_end; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t l = 0; l < dx.size(); ++l) {
      const __m256d d = _mm256_loadu_pd(dx[l] + k);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
      const __m256d drift =
          _mm256_add_pd(_mm256_set1_pd(velocity[l]), _mm256_loadu_pd(dw[l] + k));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(scale, d), drift));
    }
    count += lanes_set(_mm256_cmp_pd(acc, threshold, _CMP_GE_OQ));
  }
  return count + count_barrier_satisfied_scalar(dx, dw, velocity,
                                                two_over_gamma, r2, vec_end, n);
}

}  // namespace prsbc::kernels::detail
