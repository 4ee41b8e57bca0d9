#pragma once

#include <cstddef>

namespace sform::kernels {

// Array kernels behind the grid stencils. A scalar reference implementation
// always exists; an AVX2 variant is selected at startup when the host CPU has
// it. Both backends produce bitwise-identical results: elementwise kernels are
// identical per slot, and the reductions fix their accumulation order (four
// independent lanes combined as (l0+l1)+(l2+l3), then the remainder tail).
enum class Backend { Scalar, Avx2 };

// Backend currently in use.
Backend active_backend();

// Best backend this build can run on this host.
Backend detected_backend();

// Force a backend, primarily so tests can pin the scalar reference path.
// Throws Error if the host cannot run the requested backend.
void set_backend(Backend b);

// dst[i] = (a[i] - b[i]) * scale. dst may alias a or b.
void diff_scaled(double* dst, const double* a, const double* b, double scale,
                 std::size_t n);

// dst[i] = ca*a[i] + cb*b[i] + cc*c[i], left to right. dst may alias inputs.
void triad(double* dst, const double* a, const double* b, const double* c,
           double ca, double cb, double cc, std::size_t n);

// dst[i] = a[i] - b[i]. dst may alias a or b.
void subtract(double* dst, const double* a, const double* b, std::size_t n);

// max_i |a[i]|; 0 for n = 0. Inputs are assumed finite.
double max_abs(const double* a, std::size_t n);

// sum_i w[i] * a[i]^2 in the fixed lane order described above.
double weighted_sumsq(const double* a, const double* w, std::size_t n);

}  // namespace sform::kernels
