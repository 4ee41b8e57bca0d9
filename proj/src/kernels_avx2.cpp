// AVX2 kernel variants. This translation unit is the only one built with
// -mavx2; everything here must stay bitwise-equal to the scalar reference in
// kernels.cpp (no FMA, fixed lane-combine order in reductions).

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace sform::kernels::avx2 {

void diff_scaled(double* dst, const double* a, const double* b, double scale, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(d, vs));
  }
  for (; i < n; ++i) dst[i] = (a[i] - b[i]) * scale;
}

void triad(double* dst, const double* a, const double* b, const double* c, double ca, double cb,
           double cc, std::size_t n) {
  const __m256d va = _mm256_set1_pd(ca);
  const __m256d vb = _mm256_set1_pd(cb);
  const __m256d vc = _mm256_set1_pd(cc);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(a + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(b + i)));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(t, _mm256_mul_pd(vc, _mm256_loadu_pd(c + i))));
  }
  for (; i < n; ++i) dst[i] = ca * a[i] + cb * b[i] + cc * c[i];
}

void subtract(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

double max_abs(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vm = _mm256_max_pd(vm, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, vm);
  double m = std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
  for (; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double weighted_sumsq(const double* a, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d sq = _mm256_mul_pd(va, va);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), sq));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * (a[i] * a[i]);
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + tail;
}

}  // namespace sform::kernels::avx2
