#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "core/coords.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"
#include "core/types.hpp"

namespace sirec {

/// Trainable polynomial coefficients for the coil sensitivities: for each
/// coil, two real polynomials of order N (real and imaginary parts) in the
/// normalized coordinates.  Storage shape (coils, 2, N+1, N+1); index
/// (j, part, p, q) is the coefficient of x^p y^q.
struct PolyCoefficients {
  int64_t coils = 0;
  int64_t order = 0;
  Tensor<double> coeffs;

  int64_t terms() const { return (order + 1) * (order + 1); }
  double& at(int64_t j, int64_t part, int64_t p, int64_t q) {
    return coeffs[((j * 2 + part) * (order + 1) + p) * (order + 1) + q];
  }
  double at(int64_t j, int64_t part, int64_t p, int64_t q) const {
    return coeffs[((j * 2 + part) * (order + 1) + p) * (order + 1) + q];
  }
};

/// Monomial design matrix over a coordinate grid: row k holds x_k^p * y_k^q
/// for all 0 <= p, q <= N, column index p*(N+1)+q.  Built by iterated
/// multiplication; entries are bounded by 1 in magnitude on [-1,1]^2.
struct MonomialBasis {
  int64_t order = 0;
  Tensor<double> basis;  // (rows, (N+1)^2)
};

/// Coefficients i.i.d. Normal(0, sigma^2) with sigma = 1/(N+1), so initial
/// map magnitudes are order one.  Deterministic in `seed`.
PolyCoefficients init_poly(int64_t coils, int64_t order, uint64_t seed);

MonomialBasis build_basis(const CoordinateGrid& grid, int64_t order);

/// Sensitivity maps recorded on a tape: per coil a split-complex (d1, d2)
/// value, plus the coefficient leaves (per coil: real part, imaginary part).
struct SensGraph {
  std::vector<ad::ComplexRef> maps;
  std::vector<ad::ValueRef> leaves;
};

template <typename T>
SensGraph eval_sensitivities(ad::Tape<T>& tape, const PolyCoefficients& coeffs,
                             const MonomialBasis& basis, int64_t d1, int64_t d2);

/// Tape-free evaluation (inference and data generation).
SensitivityField eval_sensitivities_plain(const PolyCoefficients& coeffs,
                                          const MonomialBasis& basis, int64_t d1, int64_t d2);

/// Scale each pixel's coil vector to unit root-sum-of-squares.  Pixels whose
/// coil vector is exactly zero are passed through; their count is reported.
struct NormalizedMaps {
  SensitivityField field;
  int64_t degenerate_pixels = 0;
};
NormalizedMaps normalize_maps(const SensitivityField& field);

}  // namespace sirec
