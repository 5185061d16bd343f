#pragma once

#include <cstdint>

#include "core/tensor.hpp"

namespace sirec {

/// Normalized pixel-center coordinates fed to the networks and polynomials.
/// Row k corresponds to pixel (k div d2, k mod d2); column 0 is x (first
/// image axis), column 1 is y (second axis); both span [-1, 1] with spacing
/// 2/(d-1).
struct CoordinateGrid {
  int64_t d1 = 0, d2 = 0;
  Tensor<double> coords;  // (d1*d2, 2)
};

/// Build the training grid for a d1 x d2 image.  Requires d1, d2 >= 2 (the
/// spacing 2/(d-1) is undefined otherwise).
CoordinateGrid make_grid(int64_t d1, int64_t d2);

/// Build a grid with scale*d samples per axis spanning the same [-1, 1] box
/// (endpoints included).  scale=1 reproduces make_grid exactly.
CoordinateGrid make_dense_grid(int64_t d1, int64_t d2, int64_t scale);

/// Multi-frequency sinusoidal features for the positional-encoding ablation:
/// each coordinate component v expands to
///   [sin(2^0 pi v), cos(2^0 pi v), ..., sin(2^(L-1) pi v), cos(2^(L-1) pi v)]
/// giving 4L features per row (x block first, then y block).
Tensor<double> positional_encode(const CoordinateGrid& grid, int64_t bands);

}  // namespace sirec
