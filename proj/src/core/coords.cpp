#include "core/coords.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace sirec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

CoordinateGrid make_grid(int64_t d1, int64_t d2) {
  require(d1 >= 2 && d2 >= 2, ErrCode::invalid_argument,
          "make_grid: both dimensions must be >= 2 (spacing 2/(d-1) undefined), got " +
              std::to_string(d1) + "x" + std::to_string(d2));
  CoordinateGrid g;
  g.d1 = d1;
  g.d2 = d2;
  g.coords = Tensor<double>(Shape{d1 * d2, 2});
  const double step1 = 2.0 / static_cast<double>(d1 - 1);
  const double step2 = 2.0 / static_cast<double>(d2 - 1);
  double* p = g.coords.data();
  for (int64_t i = 0; i < d1; ++i) {
    const double x = -1.0 + static_cast<double>(i) * step1;
    for (int64_t j = 0; j < d2; ++j) {
      *p++ = x;
      *p++ = -1.0 + static_cast<double>(j) * step2;
    }
  }
  // Force exact endpoints against accumulated rounding.
  for (int64_t j = 0; j < d2; ++j) g.coords[(d1 - 1) * d2 * 2 + j * 2] = 1.0;
  for (int64_t i = 0; i < d1; ++i) g.coords[(i * d2 + d2 - 1) * 2 + 1] = 1.0;
  return g;
}

CoordinateGrid make_dense_grid(int64_t d1, int64_t d2, int64_t scale) {
  require(scale >= 1, ErrCode::invalid_argument,
          "make_dense_grid: scale must be a positive integer, got " + std::to_string(scale));
  return make_grid(d1 * scale, d2 * scale);
}

Tensor<double> positional_encode(const CoordinateGrid& grid, int64_t bands) {
  require(bands >= 1, ErrCode::invalid_argument,
          "positional_encode: need at least one band, got " + std::to_string(bands));
  const int64_t rows = grid.coords.shape()[0];
  const int64_t width = 4 * bands;
  Tensor<double> out(Shape{rows, width});
  for (int64_t k = 0; k < rows; ++k) {
    double* row = out.data() + k * width;
    for (int64_t axis = 0; axis < 2; ++axis) {
      const double v = grid.coords[k * 2 + axis];
      double freq = kPi;
      for (int64_t b = 0; b < bands; ++b, freq *= 2.0) {
        row[axis * 2 * bands + 2 * b] = std::sin(freq * v);
        row[axis * 2 * bands + 2 * b + 1] = std::cos(freq * v);
      }
    }
  }
  return out;
}

}  // namespace sirec
