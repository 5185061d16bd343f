#include "core/coil.hpp"

#include <cmath>

#include "core/blas.hpp"
#include "core/rng.hpp"

namespace sirec {

PolyCoefficients init_poly(int64_t coils, int64_t order, uint64_t seed) {
  require(coils >= 1, ErrCode::invalid_argument, "init_poly: need at least one coil");
  require(order >= 0, ErrCode::invalid_argument, "init_poly: order must be non-negative");
  PolyCoefficients pc;
  pc.coils = coils;
  pc.order = order;
  pc.coeffs = Tensor<double>(Shape{coils, 2, order + 1, order + 1});
  Rng rng(seed);
  const double sigma = 1.0 / static_cast<double>(order + 1);
  for (int64_t i = 0; i < pc.coeffs.numel(); ++i) pc.coeffs[i] = rng.normal(0.0, sigma);
  return pc;
}

MonomialBasis build_basis(const CoordinateGrid& grid, int64_t order) {
  require(order >= 0, ErrCode::invalid_argument, "build_basis: order must be non-negative");
  const int64_t rows = grid.coords.shape()[0];
  const int64_t n1 = order + 1;
  MonomialBasis mb;
  mb.order = order;
  mb.basis = Tensor<double>(Shape{rows, n1 * n1});
  std::vector<double> xp(n1), yq(n1);
  for (int64_t k = 0; k < rows; ++k) {
    const double x = grid.coords[k * 2];
    const double y = grid.coords[k * 2 + 1];
    xp[0] = 1.0;
    yq[0] = 1.0;
    for (int64_t p = 1; p < n1; ++p) xp[p] = xp[p - 1] * x;
    for (int64_t q = 1; q < n1; ++q) yq[q] = yq[q - 1] * y;
    double* row = mb.basis.data() + k * n1 * n1;
    for (int64_t p = 0; p < n1; ++p)
      for (int64_t q = 0; q < n1; ++q) row[p * n1 + q] = xp[p] * yq[q];
  }
  return mb;
}

template <typename T>
SensGraph eval_sensitivities(ad::Tape<T>& tape, const PolyCoefficients& coeffs,
                             const MonomialBasis& basis, int64_t d1, int64_t d2) {
  require(basis.order == coeffs.order, ErrCode::invalid_argument,
          "eval_sensitivities: basis order does not match coefficients");
  require(basis.basis.shape()[0] == d1 * d2, ErrCode::invalid_argument,
          "eval_sensitivities: basis rows do not match image size");

  auto shared_basis = std::make_shared<const Tensor<T>>(cast_tensor<T>(basis.basis));
  const int64_t terms = coeffs.terms();
  SensGraph g;
  for (int64_t j = 0; j < coeffs.coils; ++j) {
    ad::ComplexRef map;
    for (int64_t part = 0; part < 2; ++part) {
      Tensor<T> c(Shape{terms});
      for (int64_t t = 0; t < terms; ++t)
        c[t] = static_cast<T>(coeffs.coeffs[(j * 2 + part) * terms + t]);
      ad::ValueRef leaf = tape.leaf(std::move(c), "poly.c" + std::to_string(j) +
                                                      (part == 0 ? ".re" : ".im"));
      g.leaves.push_back(leaf);
      ad::ValueRef flat = tape.basis_apply(shared_basis, leaf);
      (part == 0 ? map.re : map.im) = tape.reshape(flat, Shape{d1, d2});
    }
    g.maps.push_back(map);
  }
  return g;
}

template SensGraph eval_sensitivities(ad::Tape<float>&, const PolyCoefficients&,
                                      const MonomialBasis&, int64_t, int64_t);
template SensGraph eval_sensitivities(ad::Tape<double>&, const PolyCoefficients&,
                                      const MonomialBasis&, int64_t, int64_t);

SensitivityField eval_sensitivities_plain(const PolyCoefficients& coeffs,
                                          const MonomialBasis& basis, int64_t d1, int64_t d2) {
  require(basis.order == coeffs.order && basis.basis.shape()[0] == d1 * d2,
          ErrCode::invalid_argument, "eval_sensitivities_plain: shape mismatch");
  const int64_t rows = d1 * d2, terms = coeffs.terms();
  SensitivityField f(coeffs.coils, d1, d2);
  std::vector<double> out(rows);
  for (int64_t j = 0; j < coeffs.coils; ++j) {
    for (int64_t part = 0; part < 2; ++part) {
      blas::gemm(false, false, rows, 1, terms, 1.0, basis.basis.data(),
                 coeffs.coeffs.data() + (j * 2 + part) * terms, 0.0, out.data());
      for (int64_t k = 0; k < rows; ++k) {
        std::complex<double>& z = f.v[j * rows + k];
        if (part == 0)
          z.real(out[k]);
        else
          z.imag(out[k]);
      }
    }
  }
  return f;
}

NormalizedMaps normalize_maps(const SensitivityField& field) {
  NormalizedMaps result;
  result.field = field;
  const int64_t pixels = field.d1 * field.d2;
  for (int64_t k = 0; k < pixels; ++k) {
    double ss = 0.0;
    for (int64_t j = 0; j < field.coils; ++j) ss += std::norm(field.v[j * pixels + k]);
    if (ss == 0.0) {
      ++result.degenerate_pixels;
      continue;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (int64_t j = 0; j < field.coils; ++j) result.field.v[j * pixels + k] *= inv;
  }
  return result;
}

}  // namespace sirec
