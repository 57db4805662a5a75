#pragma once

// Batched length-k transforms along mode 3, backed by FFTW. A batch is a
// run of consecutive tubes t0..t0+count-1 of a tensor whose tubes are
// strided by `stride` (= m*n) elements. Plans are created once per
// (kind, k, stride, count) under a mutex and executed through the
// new-array interface, which is thread-safe.

#include <complex>

namespace sc2d::detail {

/// Tubes per batch. Fixed so that the work split, and with it every
/// floating-point result, does not depend on the thread count.
inline constexpr long kTubeBatch = 512;

/// Half spectrum (k/2+1 bins) of real tubes.
void r2c_batch(int k, long stride, long count, const double* in, std::complex<double>* out);
/// Real tubes from their half spectrum; unnormalized, input preserved.
void c2r_batch(int k, long stride, long count, const std::complex<double>* in, double* out);
/// Full forward spectrum of complex tubes.
void c2c_batch(int k, long stride, long count, const std::complex<double>* in, std::complex<double>* out);

}  // namespace sc2d::detail
