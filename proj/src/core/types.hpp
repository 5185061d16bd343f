#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"
#include "core/tensor.hpp"

namespace sirec {

/// Dense complex image, row-major d1 x d2.  All cross-module data carriers
/// hold double precision; the training tape casts to its working precision.
struct ComplexImage {
  int64_t d1 = 0, d2 = 0;
  std::vector<std::complex<double>> v;

  ComplexImage() = default;
  ComplexImage(int64_t r, int64_t c) : d1(r), d2(c), v(static_cast<size_t>(r * c)) {}
  std::complex<double>& at(int64_t i, int64_t j) { return v[i * d2 + j]; }
  const std::complex<double>& at(int64_t i, int64_t j) const { return v[i * d2 + j]; }
  int64_t numel() const { return d1 * d2; }
};

/// Per-coil complex maps over the image grid (coil-major storage).
struct SensitivityField {
  int64_t coils = 0, d1 = 0, d2 = 0;
  std::vector<std::complex<double>> v;

  SensitivityField() = default;
  SensitivityField(int64_t c, int64_t r, int64_t cc)
      : coils(c), d1(r), d2(cc), v(static_cast<size_t>(c * r * cc)) {}
  std::complex<double>& at(int64_t j, int64_t r, int64_t c) { return v[(j * d1 + r) * d2 + c]; }
  const std::complex<double>& at(int64_t j, int64_t r, int64_t c) const {
    return v[(j * d1 + r) * d2 + c];
  }
};

/// Convert a centered (fftshifted, DC at floor(n/2)) line index to a standard
/// (DC at 0) index, and back.  Part of the public mask contract: masks are
/// specified in centered indices, k-space arrays are stored standard.
inline int64_t centered_to_standard(int64_t c, int64_t n) {
  return ((c - n / 2) % n + n) % n;
}
inline int64_t standard_to_centered(int64_t u, int64_t n) {
  return ((u + n / 2) % n + n) % n;
}

/// Cartesian undersampling pattern: full readout lines along the first axis,
/// selection along the phase-encode (second) axis.  Kept lines are stored as
/// sorted centered indices.
struct SamplingMask {
  int64_t d1 = 0, d2 = 0;
  std::vector<int64_t> kept_centered;  // sorted, unique, in [0, d2)

  bool kept_std(int64_t u) const {
    const int64_t c = standard_to_centered(u, d2);
    return std::binary_search(kept_centered.begin(), kept_centered.end(), c);
  }

  int64_t kept_count() const { return static_cast<int64_t>(kept_centered.size()); }

  bool same_pattern(const SamplingMask& o) const {
    return d1 == o.d1 && d2 == o.d2 && kept_centered == o.kept_centered;
  }

  /// Binary d1 x d2 matrix in standard (DC at (0,0)) layout.
  template <typename T>
  Tensor<T> matrix() const {
    Tensor<T> m(Shape{d1, d2});
    for (int64_t u = 0; u < d2; ++u) {
      if (!kept_std(u)) continue;
      for (int64_t i = 0; i < d1; ++i) m[i * d2 + u] = T(1);
    }
    return m;
  }
};

/// Multi-coil k-space data (standard layout, DC at (0,0)) with its mask.
/// For measured volumes every entry outside a kept line is exactly zero.
struct KSpaceVolume {
  int64_t coils = 0, d1 = 0, d2 = 0;
  std::vector<std::complex<double>> v;  // coil-major
  SamplingMask mask;

  KSpaceVolume() = default;
  KSpaceVolume(int64_t c, int64_t r, int64_t cc)
      : coils(c), d1(r), d2(cc), v(static_cast<size_t>(c * r * cc)) {}
  std::complex<double>& at(int64_t j, int64_t r, int64_t c) { return v[(j * d1 + r) * d2 + c]; }
  const std::complex<double>& at(int64_t j, int64_t r, int64_t c) const {
    return v[(j * d1 + r) * d2 + c];
  }
};

template <typename T>
Tensor<T> cast_tensor(const Tensor<double>& src) {
  Tensor<T> out(src.shape());
  for (int64_t i = 0; i < src.numel(); ++i) out[i] = static_cast<T>(src[i]);
  return out;
}

}  // namespace sirec
