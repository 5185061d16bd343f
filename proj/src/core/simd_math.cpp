#include "core/simd_math.hpp"

#include <cmath>

namespace sirec::simd {
namespace {

// Argument reduction by pi with a two-constant split (fma keeps the
// cancellation exact), then odd/even minimax polynomials on [-pi/2, pi/2].
constexpr float kInvPi = 0.31830988618379067f;
constexpr float kPiHi = 3.14159274101257324f;   // float(pi)
constexpr float kPiLo = -8.74227765734758577e-8f;  // pi - kPiHi

inline float reduced(float x, int& parity) {
  float k = std::nearbyintf(x * kInvPi);
  parity = static_cast<int>(k);
  float r = std::fmaf(-k, kPiHi, x);
  return std::fmaf(-k, kPiLo, r);
}

inline float sin_poly(float r) {
  float t = r * r;
  float p = std::fmaf(t, 2.608454067e-06f, -1.981087162e-04f);
  p = std::fmaf(t, p, 8.333084395e-03f);
  p = std::fmaf(t, p, -1.666666028e-01f);
  return std::fmaf(r * t, p, r);
}

inline float cos_poly(float r) {
  float t = r * r;
  float p = std::fmaf(t, -2.607348008e-07f, 2.476165569e-05f);
  p = std::fmaf(t, p, -1.388839835e-03f);
  p = std::fmaf(t, p, 4.166664026e-02f);
  p = std::fmaf(t, p, -4.999999954e-01f);
  return std::fmaf(t, p, 1.0f);
}

}  // namespace

void vec_sin(const float* x, float* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    int parity;
    float r = reduced(x[i], parity);
    float s = sin_poly(r);
    out[i] = (parity & 1) ? -s : s;
  }
}

void vec_cos(const float* x, float* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    int parity;
    float r = reduced(x[i], parity);
    float c = cos_poly(r);
    out[i] = (parity & 1) ? -c : c;
  }
}

void vec_sin(const double* x, double* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = std::sin(x[i]);
}

void vec_cos(const double* x, double* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = std::cos(x[i]);
}

}  // namespace sirec::simd
