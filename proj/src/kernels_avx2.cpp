#include "creco/kernels.hpp"

#ifdef CRECO_HAVE_AVX2_BUILD

#include <immintrin.h>

#include <cmath>

// Four-wide double kernels. div/sqrt/mul/add lanes are correctly rounded, so
// every elementwise kernel here is bit-identical to the scalar reference
// (intrinsics are never fused, and the scalar TU targets baseline x86-64
// where no FMA contraction happens either).

namespace creco::kernels::avx2 {

void ucb_fill(const std::uint32_t* counts, const double* sums, std::size_t n,
              double bonus_beta, double unvisited, double* out) {
  const __m256d beta = _mm256_set1_pd(bonus_beta);
  const __m256d init = _mm256_set1_pd(unvisited);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i c32 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(counts + i));
    // counts stay far below 2^31, so the signed conversion is exact
    const __m256d cnt = _mm256_cvtepi32_pd(c32);
    const __m256d mean = _mm256_div_pd(_mm256_loadu_pd(sums + i), cnt);
    const __m256d bonus = _mm256_sqrt_pd(_mm256_div_pd(beta, cnt));
    const __m256d val = _mm256_add_pd(mean, bonus);
    const __m256d visited = _mm256_cmp_pd(cnt, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(init, val, visited));
  }
  for (; i < n; ++i) {
    if (counts[i] == 0) {
      out[i] = unvisited;
    } else {
      const double cnt = static_cast<double>(counts[i]);
      out[i] = sums[i] / cnt + std::sqrt(bonus_beta / cnt);
    }
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                           _mm256_loadu_pd(b + i)));
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double partial[2];
  _mm_storeu_pd(partial, pair);
  double total = partial[0] + partial[1];
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void lerp(const double* a, const double* b, double t, std::size_t n,
          double* out) {
  const __m256d tv = _mm256_set1_pd(t);
  const __m256d uv = _mm256_set1_pd(1.0 - t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d av = _mm256_mul_pd(uv, _mm256_loadu_pd(a + i));
    const __m256d bv = _mm256_mul_pd(tv, _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(av, bv));
  }
  const double u = 1.0 - t;
  for (; i < n; ++i) out[i] = u * a[i] + t * b[i];
}

void scale(const double* a, double s, std::size_t n, double* out) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sv, _mm256_loadu_pd(a + i)));
  }
  for (; i < n; ++i) out[i] = s * a[i];
}

}  // namespace creco::kernels::avx2

#endif  // CRECO_HAVE_AVX2_BUILD
