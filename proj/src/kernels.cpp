#include "sform/kernels.hpp"

#include "sform/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sform::kernels {

#if SFORM_HAVE_AVX2
// Defined in kernels_avx2.cpp, compiled with -mavx2.
namespace avx2 {
void diff_scaled(double* dst, const double* a, const double* b, double scale, std::size_t n);
void triad(double* dst, const double* a, const double* b, const double* c, double ca, double cb,
           double cc, std::size_t n);
void subtract(double* dst, const double* a, const double* b, std::size_t n);
double max_abs(const double* a, std::size_t n);
double weighted_sumsq(const double* a, const double* w, std::size_t n);
}  // namespace avx2
#endif

namespace scalar {

void diff_scaled(double* dst, const double* a, const double* b, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = (a[i] - b[i]) * scale;
}

void triad(double* dst, const double* a, const double* b, const double* c, double ca, double cb,
           double cc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = ca * a[i] + cb * b[i] + cc * c[i];
}

void subtract(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

// Mirrors the vector register layout: lane j accumulates elements 4k + j, the
// lanes combine pairwise, and the sub-width remainder is added last. Keeping
// the same shape here is what makes the two backends agree bitwise.
double weighted_sumsq(const double* a, const double* w, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      lane[j] += w[i + j] * (a[i + j] * a[i + j]);
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * (a[i] * a[i]);
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + tail;
}

}  // namespace scalar

namespace {

Backend best_backend() {
#if SFORM_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
  return Backend::Scalar;
}

Backend g_active = best_backend();

}  // namespace

Backend active_backend() { return g_active; }

Backend detected_backend() { return best_backend(); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && best_backend() != Backend::Avx2) {
    throw Error("AVX2 kernel backend is not available on this host");
  }
  g_active = b;
}

void diff_scaled(double* dst, const double* a, const double* b, double scale, std::size_t n) {
#if SFORM_HAVE_AVX2
  if (g_active == Backend::Avx2) return avx2::diff_scaled(dst, a, b, scale, n);
#endif
  scalar::diff_scaled(dst, a, b, scale, n);
}

void triad(double* dst, const double* a, const double* b, const double* c, double ca, double cb,
           double cc, std::size_t n) {
#if SFORM_HAVE_AVX2
  if (g_active == Backend::Avx2) return avx2::triad(dst, a, b, c, ca, cb, cc, n);
#endif
  scalar::triad(dst, a, b, c, ca, cb, cc, n);
}

void subtract(double* dst, const double* a, const double* b, std::size_t n) {
#if SFORM_HAVE_AVX2
  if (g_active == Backend::Avx2) return avx2::subtract(dst, a, b, n);
#endif
  scalar::subtract(dst, a, b, n);
}

double max_abs(const double* a, std::size_t n) {
#if SFORM_HAVE_AVX2
  if (g_active == Backend::Avx2) return avx2::max_abs(a, n);
#endif
  return scalar::max_abs(a, n);
}

double weighted_sumsq(const double* a, const double* w, std::size_t n) {
#if SFORM_HAVE_AVX2
  if (g_active == Backend::Avx2) return avx2::weighted_sumsq(a, w, n);
#endif
  return scalar::weighted_sumsq(a, w, n);
}

}  // namespace sform::kernels
