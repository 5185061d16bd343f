#pragma once

#include <cstdint>

namespace sirec::fft {

/// Unitary 2D DFT over split real/imaginary arrays (row-major, d1 rows by d2
/// columns, DC bin at index (0,0)).  fft2 applies the forward kernel
/// exp(-2*pi*i*...), ifft2 its inverse; both scale by 1/sqrt(d1*d2) so the
/// pair is an exact round trip and each direction preserves the l2 norm.
///
/// Output buffers must not alias the inputs.  Plans are cached per shape and
/// created with deterministic heuristics, so repeated transforms of the same
/// data are bit-identical.
void fft2(int64_t d1, int64_t d2, const float* re_in, const float* im_in,
          float* re_out, float* im_out);
void ifft2(int64_t d1, int64_t d2, const float* re_in, const float* im_in,
           float* re_out, float* im_out);
void fft2(int64_t d1, int64_t d2, const double* re_in, const double* im_in,
          double* re_out, double* im_out);
void ifft2(int64_t d1, int64_t d2, const double* re_in, const double* im_in,
           double* re_out, double* im_out);

}  // namespace sirec::fft
