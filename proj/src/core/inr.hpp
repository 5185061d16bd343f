#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"
#include "core/types.hpp"

namespace sirec {

enum class Activation { sine, relu };

/// One dense layer: weight (fan_out x fan_in) and bias (fan_out).
struct Layer {
  Tensor<double> w;
  Tensor<double> b;
};

/// Parameters of the two coordinate networks (separate real and imaginary
/// branches, no weight sharing).  Non-final layers apply the configured
/// activation; the final layer is affine only.
struct InrParameters {
  std::vector<Layer> real_branch;
  std::vector<Layer> imag_branch;
  Activation activation = Activation::sine;
  double w0 = 1.0;       // first-layer frequency scale (baked into weights at init)
  bool use_pe = false;   // positional-encoding ablation
  int64_t pe_bands = 6;  // bands L when use_pe is set
};

/// Layer-size list [input, hidden..., 1] for `hidden` layers of `width`.
std::vector<int64_t> make_arch(int64_t input_dim, int64_t hidden_layers, int64_t width);

/// Sine-network initialization: first-layer weights uniform on
/// [-1/n, 1/n] scaled by w0 (n = fan-in), deeper layers uniform on
/// [-sqrt(6/n), sqrt(6/n)], all biases zero.  Deterministic in `seed`.
InrParameters init_siren(const std::vector<int64_t>& arch, double w0, uint64_t seed);

/// ReLU ablation variant: He-style uniform [-sqrt(6/n), sqrt(6/n)] on every
/// layer, biases zero.
InrParameters init_relu_mlp(const std::vector<int64_t>& arch, uint64_t seed);

/// Trainable parameters in one branch.
int64_t branch_param_count(const std::vector<Layer>& branch);

/// Image graph emitted onto a tape: a split-complex (d1, d2) value plus the
/// weight/bias leaves in a deterministic order (real branch first, then
/// imaginary; per layer: weight, bias).
struct ImageGraph {
  ad::ComplexRef image;
  std::vector<ad::ValueRef> leaves;
};

/// Record both branches on the tape.  `inputs` is the (d1*d2 x input_dim)
/// network input — the raw grid or its positional encoding — and must match
/// the first layer's fan-in.
template <typename T>
ImageGraph eval_image(ad::Tape<T>& tape, const InrParameters& params,
                      const Tensor<double>& inputs, int64_t d1, int64_t d2);

/// Plain double-precision forward pass (inference path; no tape).  Performs
/// the same arithmetic as the double tape, so results are bit-identical to a
/// recorded graph's output.
ComplexImage eval_image_plain(const InrParameters& params, const Tensor<double>& inputs,
                              int64_t d1, int64_t d2);

}  // namespace sirec
