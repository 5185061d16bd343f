#pragma once

#include <cstdint>

namespace sirec::simd {

/// Elementwise sine / cosine over contiguous arrays.
///
/// The float overloads use a branch-free polynomial kernel that the compiler
/// auto-vectorizes (libm's scalar sinf would dominate the training profile
/// otherwise); absolute error is below 2e-7 for arguments up to a few
/// thousand.  The double overloads defer to libm, which is what the
/// double-precision graphs used by gradient checks want.
void vec_sin(const float* x, float* out, int64_t n);
void vec_cos(const float* x, float* out, int64_t n);
void vec_sin(const double* x, double* out, int64_t n);
void vec_cos(const double* x, double* out, int64_t n);

}  // namespace sirec::simd
