#include "core/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>

namespace sirec::fft {
namespace {

// One split-format guru plan per (shape, precision), each owning four
// fftw-allocated staging buffers.  Plans are only ever executed on the exact
// arrays they were created with: FFTW's split new-array execution requires
// the re/im pointer separations to match the plan-time layout (FFTW_UNALIGNED
// waives the alignment condition but not that one), which no cache keyed on
// shape alone can guarantee for caller buffers.  Staging costs four memcpys
// per transform and buys unconditional validity, aligned SIMD codelets, and
// bit-deterministic results regardless of where callers keep their data.
// A single plan serves both directions: executing it with the real and
// imaginary parts swapped computes the opposite-sign transform (standard
// FFTW split-API identity).  FFTW_ESTIMATE keeps planning deterministic.
std::mutex plan_mutex;

struct PlanD {
  fftw_plan plan = nullptr;
  double* in_re = nullptr;
  double* in_im = nullptr;
  double* out_re = nullptr;
  double* out_im = nullptr;
};

struct PlanF {
  fftwf_plan plan = nullptr;
  float* in_re = nullptr;
  float* in_im = nullptr;
  float* out_re = nullptr;
  float* out_im = nullptr;
};

std::map<std::pair<int64_t, int64_t>, PlanD> plans_d;
std::map<std::pair<int64_t, int64_t>, PlanF> plans_f;

const PlanD& plan_for_d(int64_t d1, int64_t d2) {
  auto it = plans_d.find({d1, d2});
  if (it != plans_d.end()) return it->second;
  PlanD entry;
  const size_t n = static_cast<size_t>(d1 * d2);
  entry.in_re = fftw_alloc_real(n);
  entry.in_im = fftw_alloc_real(n);
  entry.out_re = fftw_alloc_real(n);
  entry.out_im = fftw_alloc_real(n);
  fftw_iodim dims[2] = {
      {static_cast<int>(d1), static_cast<int>(d2), static_cast<int>(d2)},
      {static_cast<int>(d2), 1, 1},
  };
  entry.plan = fftw_plan_guru_split_dft(2, dims, 0, nullptr, entry.in_re, entry.in_im,
                                        entry.out_re, entry.out_im, FFTW_ESTIMATE);
  return plans_d.emplace(std::make_pair(d1, d2), entry).first->second;
}

const PlanF& plan_for_f(int64_t d1, int64_t d2) {
  auto it = plans_f.find({d1, d2});
  if (it != plans_f.end()) return it->second;
  PlanF entry;
  const size_t n = static_cast<size_t>(d1 * d2);
  entry.in_re = fftwf_alloc_real(n);
  entry.in_im = fftwf_alloc_real(n);
  entry.out_re = fftwf_alloc_real(n);
  entry.out_im = fftwf_alloc_real(n);
  fftwf_iodim dims[2] = {
      {static_cast<int>(d1), static_cast<int>(d2), static_cast<int>(d2)},
      {static_cast<int>(d2), 1, 1},
  };
  entry.plan = fftwf_plan_guru_split_dft(2, dims, 0, nullptr, entry.in_re, entry.in_im,
                                         entry.out_re, entry.out_im, FFTW_ESTIMATE);
  return plans_f.emplace(std::make_pair(d1, d2), entry).first->second;
}

}  // namespace

void fft2(int64_t d1, int64_t d2, const double* re_in, const double* im_in,
          double* re_out, double* im_out) {
  const size_t n = static_cast<size_t>(d1 * d2);
  const double s = 1.0 / std::sqrt(static_cast<double>(d1 * d2));
  std::lock_guard<std::mutex> lock(plan_mutex);
  const PlanD& p = plan_for_d(d1, d2);
  std::memcpy(p.in_re, re_in, n * sizeof(double));
  std::memcpy(p.in_im, im_in, n * sizeof(double));
  fftw_execute(p.plan);
  for (size_t i = 0; i < n; ++i) re_out[i] = p.out_re[i] * s;
  for (size_t i = 0; i < n; ++i) im_out[i] = p.out_im[i] * s;
}

void ifft2(int64_t d1, int64_t d2, const double* re_in, const double* im_in,
           double* re_out, double* im_out) {
  const size_t n = static_cast<size_t>(d1 * d2);
  const double s = 1.0 / std::sqrt(static_cast<double>(d1 * d2));
  std::lock_guard<std::mutex> lock(plan_mutex);
  const PlanD& p = plan_for_d(d1, d2);
  // Backward transform via the swap identity: feed (im, re), read (im, re).
  std::memcpy(p.in_re, im_in, n * sizeof(double));
  std::memcpy(p.in_im, re_in, n * sizeof(double));
  fftw_execute(p.plan);
  for (size_t i = 0; i < n; ++i) re_out[i] = p.out_im[i] * s;
  for (size_t i = 0; i < n; ++i) im_out[i] = p.out_re[i] * s;
}

void fft2(int64_t d1, int64_t d2, const float* re_in, const float* im_in,
          float* re_out, float* im_out) {
  const size_t n = static_cast<size_t>(d1 * d2);
  const float s = static_cast<float>(1.0 / std::sqrt(static_cast<double>(d1 * d2)));
  std::lock_guard<std::mutex> lock(plan_mutex);
  const PlanF& p = plan_for_f(d1, d2);
  std::memcpy(p.in_re, re_in, n * sizeof(float));
  std::memcpy(p.in_im, im_in, n * sizeof(float));
  fftwf_execute(p.plan);
  for (size_t i = 0; i < n; ++i) re_out[i] = p.out_re[i] * s;
  for (size_t i = 0; i < n; ++i) im_out[i] = p.out_im[i] * s;
}

void ifft2(int64_t d1, int64_t d2, const float* re_in, const float* im_in,
           float* re_out, float* im_out) {
  const size_t n = static_cast<size_t>(d1 * d2);
  const float s = static_cast<float>(1.0 / std::sqrt(static_cast<double>(d1 * d2)));
  std::lock_guard<std::mutex> lock(plan_mutex);
  const PlanF& p = plan_for_f(d1, d2);
  std::memcpy(p.in_re, im_in, n * sizeof(float));
  std::memcpy(p.in_im, re_in, n * sizeof(float));
  fftwf_execute(p.plan);
  for (size_t i = 0; i < n; ++i) re_out[i] = p.out_im[i] * s;
  for (size_t i = 0; i < n; ++i) im_out[i] = p.out_re[i] * s;
}

}  // namespace sirec::fft
