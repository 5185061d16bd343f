#pragma once

#include <cstdint>

namespace sirec::blas {

/// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C where op(A) is
/// (m x k) and op(B) is (k x n).  Matrices are contiguous: the stored leading
/// dimension equals the stored column count (A is m x k when trans_a is
/// false, k x m when true, and so on).
///
/// Backed by OpenBLAS when it can be loaded at runtime, otherwise by a
/// portable blocked kernel.  Always single-threaded so repeated evaluations
/// of a graph are bit-identical.
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, const float* b, float beta, float* c);
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, const double* b, double beta, double* c);

/// True when an external BLAS implementation is in use.
bool accelerated();

}  // namespace sirec::blas
