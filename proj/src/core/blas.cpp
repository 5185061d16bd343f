#include "core/blas.hpp"

#include <dlfcn.h>
#include <stdlib.h>

#include <cstring>
#include <mutex>
#include <vector>

namespace sirec::blas {
namespace {

// cblas enum values (stable ABI constants).
constexpr int kRowMajor = 101;
constexpr int kNoTrans = 111;
constexpr int kTrans = 112;

using SgemmFn = void (*)(int, int, int, int, int, int, float, const float*, int,
                         const float*, int, float, float*, int);
using DgemmFn = void (*)(int, int, int, int, int, int, double, const double*, int,
                         const double*, int, double, double*, int);
using SetThreadsFn = void (*)(int);

struct Backend {
  SgemmFn sgemm = nullptr;
  DgemmFn dgemm = nullptr;
};

// OpenBLAS picks its kernels from CPUID at load time.  Virtualized CPUs often
// report a masked model string, which sends it down a generic (several times
// slower) code path even though AVX-512 is available; pinning the core type
// before the library initializes restores the fast kernels.  Respect an
// explicit user setting.
void pin_core_type() {
#if defined(__x86_64__) || defined(__i386__)
  if (getenv("OPENBLAS_CORETYPE") != nullptr) return;
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq") &&
      __builtin_cpu_supports("avx512bw") && __builtin_cpu_supports("avx512vl")) {
    setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
  }
#endif
}

Backend load_backend() {
  Backend be;
  pin_core_type();
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  const char* names[] = {"libopenblas.so.0", "libopenblas.so", "libopenblas64.so.0"};
  void* handle = nullptr;
  for (const char* name : names) {
    handle = dlopen(name, RTLD_NOW | RTLD_LOCAL);
    if (handle != nullptr) break;
  }
  if (handle == nullptr) return be;

  auto sgemm = reinterpret_cast<SgemmFn>(dlsym(handle, "cblas_sgemm"));
  auto dgemm = reinterpret_cast<DgemmFn>(dlsym(handle, "cblas_dgemm"));
  if (sgemm == nullptr || dgemm == nullptr) {
    dlclose(handle);
    return be;
  }
  if (auto set_threads = reinterpret_cast<SetThreadsFn>(dlsym(handle, "openblas_set_num_threads"))) {
    set_threads(1);
  }
  be.sgemm = sgemm;
  be.dgemm = dgemm;
  return be;
}

const Backend& backend() {
  static Backend be = load_backend();
  return be;
}

// Portable fallback.  Loop orders are chosen so the innermost loop runs with
// unit stride and auto-vectorizes; adequate when no system BLAS exists.
template <typename T>
void gemm_fallback(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
                   T alpha, const T* a, const T* b, T beta, T* c) {
  if (beta == T(0)) {
    std::memset(c, 0, sizeof(T) * static_cast<size_t>(m) * static_cast<size_t>(n));
  } else if (beta != T(1)) {
    for (int64_t i = 0; i < m * n; ++i) c[i] *= beta;
  }
  if (alpha == T(0) || k == 0) return;

  auto at = [&](int64_t i, int64_t p) { return trans_a ? a[p * m + i] : a[i * k + p]; };

  if (!trans_b) {
    // C[i,:] += alpha * A[i,p] * B[p,:]
    for (int64_t i = 0; i < m; ++i) {
      T* ci = c + i * n;
      for (int64_t p = 0; p < k; ++p) {
        const T aip = alpha * at(i, p);
        const T* bp = b + p * n;
        for (int64_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
      }
    }
  } else {
    // B stored n x k: dot products over contiguous rows.
    for (int64_t i = 0; i < m; ++i) {
      T* ci = c + i * n;
      for (int64_t j = 0; j < n; ++j) {
        T acc = T(0);
        const T* bj = b + j * k;
        if (!trans_a) {
          const T* ai = a + i * k;
          for (int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
        } else {
          for (int64_t p = 0; p < k; ++p) acc += a[p * m + i] * bj[p];
        }
        ci[j] += alpha * acc;
      }
    }
  }
}

}  // namespace

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, const float* b, float beta, float* c) {
  const Backend& be = backend();
  if (be.sgemm != nullptr) {
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    be.sgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
             static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha,
             a, lda, b, ldb, beta, c, static_cast<int>(n));
    return;
  }
  gemm_fallback(trans_a, trans_b, m, n, k, alpha, a, b, beta, c);
}

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, const double* b, double beta, double* c) {
  const Backend& be = backend();
  if (be.dgemm != nullptr) {
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    be.dgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
             static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha,
             a, lda, b, ldb, beta, c, static_cast<int>(n));
    return;
  }
  gemm_fallback(trans_a, trans_b, m, n, k, alpha, a, b, beta, c);
}

bool accelerated() { return backend().sgemm != nullptr; }

}  // namespace sirec::blas
