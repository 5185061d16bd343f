#include "core/inr.hpp"

#include <cmath>

#include "core/blas.hpp"
#include "core/rng.hpp"
#include "core/simd_math.hpp"

namespace sirec {
namespace {

std::vector<Layer> init_branch(const std::vector<int64_t>& arch, double w0, bool siren_first,
                               Rng& rng) {
  std::vector<Layer> branch;
  for (size_t l = 0; l + 1 < arch.size(); ++l) {
    const int64_t fan_in = arch[l], fan_out = arch[l + 1];
    Layer layer{Tensor<double>(Shape{fan_out, fan_in}), Tensor<double>(Shape{fan_out})};
    const double n = static_cast<double>(fan_in);
    if (l == 0 && siren_first) {
      // U(-1/n, 1/n) scaled by w0.
      for (int64_t i = 0; i < layer.w.numel(); ++i)
        layer.w[i] = w0 * rng.uniform(-1.0 / n, 1.0 / n);
    } else {
      const double bound = std::sqrt(6.0 / n);
      for (int64_t i = 0; i < layer.w.numel(); ++i) layer.w[i] = rng.uniform(-bound, bound);
    }
    branch.push_back(std::move(layer));
  }
  return branch;
}

void validate_arch(const std::vector<int64_t>& arch) {
  require(arch.size() >= 2, ErrCode::invalid_argument,
          "network architecture needs at least an input and an output layer");
  for (int64_t n : arch)
    require(n >= 1, ErrCode::invalid_argument, "network layer sizes must be positive");
}

}  // namespace

std::vector<int64_t> make_arch(int64_t input_dim, int64_t hidden_layers, int64_t width) {
  require(input_dim >= 1 && hidden_layers >= 1 && width >= 1, ErrCode::invalid_argument,
          "make_arch: input dim, hidden layer count and width must be positive");
  std::vector<int64_t> arch;
  arch.push_back(input_dim);
  for (int64_t i = 0; i < hidden_layers; ++i) arch.push_back(width);
  arch.push_back(1);
  return arch;
}

InrParameters init_siren(const std::vector<int64_t>& arch, double w0, uint64_t seed) {
  validate_arch(arch);
  require(w0 > 0, ErrCode::invalid_argument, "init_siren: w0 must be positive");
  Rng rng(seed);
  InrParameters p;
  p.activation = Activation::sine;
  p.w0 = w0;
  p.real_branch = init_branch(arch, w0, true, rng);
  p.imag_branch = init_branch(arch, w0, true, rng);
  return p;
}

InrParameters init_relu_mlp(const std::vector<int64_t>& arch, uint64_t seed) {
  validate_arch(arch);
  Rng rng(seed);
  InrParameters p;
  p.activation = Activation::relu;
  p.w0 = 1.0;
  p.real_branch = init_branch(arch, 1.0, false, rng);
  p.imag_branch = init_branch(arch, 1.0, false, rng);
  return p;
}

int64_t branch_param_count(const std::vector<Layer>& branch) {
  int64_t n = 0;
  for (const Layer& l : branch) n += l.w.numel() + l.b.numel();
  return n;
}

template <typename T>
static ad::ValueRef record_branch(ad::Tape<T>& tape, const std::vector<Layer>& branch,
                                  Activation act, ad::ValueRef input, const std::string& prefix,
                                  std::vector<ad::ValueRef>& leaves) {
  ad::ValueRef h = input;
  for (size_t l = 0; l < branch.size(); ++l) {
    ad::ValueRef w = tape.leaf(cast_tensor<T>(branch[l].w), prefix + ".w" + std::to_string(l));
    ad::ValueRef b = tape.leaf(cast_tensor<T>(branch[l].b), prefix + ".b" + std::to_string(l));
    leaves.push_back(w);
    leaves.push_back(b);
    h = tape.affine(h, w, b);
    if (l + 1 < branch.size()) h = act == Activation::sine ? tape.sine(h) : tape.relu(h);
  }
  return h;
}

template <typename T>
ImageGraph eval_image(ad::Tape<T>& tape, const InrParameters& params,
                      const Tensor<double>& inputs, int64_t d1, int64_t d2) {
  require(!params.real_branch.empty() && params.real_branch.size() == params.imag_branch.size(),
          ErrCode::invalid_argument, "eval_image: branches empty or of unequal depth");
  require(inputs.shape().size() == 2 && inputs.shape()[0] == d1 * d2, ErrCode::invalid_argument,
          "eval_image: input rows must equal d1*d2");
  require(inputs.shape()[1] == params.real_branch[0].w.shape()[1], ErrCode::invalid_argument,
          "eval_image: input width " + std::to_string(inputs.shape()[1]) +
              " does not match first-layer fan-in " +
              std::to_string(params.real_branch[0].w.shape()[1]));
  require(params.real_branch.back().w.shape()[0] == 1, ErrCode::invalid_argument,
          "eval_image: final layer must have a single output");

  ImageGraph g;
  ad::ValueRef x = tape.constant(cast_tensor<T>(inputs), "grid");
  ad::ValueRef re = record_branch(tape, params.real_branch, params.activation, x, "inr.re", g.leaves);
  ad::ValueRef im = record_branch(tape, params.imag_branch, params.activation, x, "inr.im", g.leaves);
  g.image = {tape.reshape(re, Shape{d1, d2}), tape.reshape(im, Shape{d1, d2})};
  return g;
}

template ImageGraph eval_image(ad::Tape<float>&, const InrParameters&, const Tensor<double>&,
                               int64_t, int64_t);
template ImageGraph eval_image(ad::Tape<double>&, const InrParameters&, const Tensor<double>&,
                               int64_t, int64_t);

ComplexImage eval_image_plain(const InrParameters& params, const Tensor<double>& inputs,
                              int64_t d1, int64_t d2) {
  require(!params.real_branch.empty() && inputs.shape().size() == 2 &&
              inputs.shape()[0] == d1 * d2 &&
              inputs.shape()[1] == params.real_branch[0].w.shape()[1],
          ErrCode::invalid_argument, "eval_image_plain: shape mismatch");

  const int64_t rows = d1 * d2;
  ComplexImage img(d1, d2);
  // Same gemm/bias/activation sequence as the double tape, so a saved model
  // re-queried at scale 1 reproduces the recorded graph bit-for-bit.
  for (int part = 0; part < 2; ++part) {
    const std::vector<Layer>& branch = part == 0 ? params.real_branch : params.imag_branch;
    Tensor<double> h = inputs;
    for (size_t l = 0; l < branch.size(); ++l) {
      const int64_t in = branch[l].w.shape()[1], out = branch[l].w.shape()[0];
      Tensor<double> y(Shape{rows, out});
      blas::gemm(false, true, rows, out, in, 1.0, h.data(), branch[l].w.data(), 0.0, y.data());
      double* yp = y.data();
      for (int64_t r = 0; r < rows; ++r, yp += out)
        for (int64_t c = 0; c < out; ++c) yp[c] += branch[l].b[c];
      if (l + 1 < branch.size()) {
        if (params.activation == Activation::sine) {
          simd::vec_sin(y.data(), y.data(), y.numel());
        } else {
          for (int64_t i = 0; i < y.numel(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
        }
      }
      h = std::move(y);
    }
    for (int64_t k = 0; k < rows; ++k) {
      if (part == 0)
        img.v[k].real(h[k]);
      else
        img.v[k].imag(h[k]);
    }
  }
  return img;
}

}  // namespace sirec
