#include "core/tape.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/blas.hpp"
#include "core/errors.hpp"
#include "core/fft.hpp"
#include "core/rng.hpp"
#include "core/simd_math.hpp"

namespace sirec::ad {

template <typename T>
void Tape<T>::check_ref(ValueRef ref, const char* where) const {
  require(ref.node >= 0 && ref.node < static_cast<int32_t>(nodes_.size()),
          ErrCode::invalid_argument, std::string(where) + ": dangling value reference");
  require(ref.slot >= 0 && ref.slot < static_cast<int32_t>(nodes_[ref.node].out.size()),
          ErrCode::invalid_argument, std::string(where) + ": bad output slot");
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node_of(ValueRef ref) const {
  check_ref(ref, "tape");
  return nodes_[ref.node];
}

template <typename T>
ValueRef Tape<T>::push(Node node) {
  for (int i = 0; i < node.n_in; ++i) {
    check_ref(node.in[i], "tape op input");
    node.needs = node.needs || nodes_[node.in[i].node].needs;
  }
  if (node.kind == OpKind::leaf) node.needs = true;
  compute(node);
  nodes_.push_back(std::move(node));
  grads_ready_ = false;  // shapes changed; reallocate on next backward
  return {static_cast<int32_t>(nodes_.size() - 1), 0};
}

// -- builders -----------------------------------------------------------------

template <typename T>
ValueRef Tape<T>::leaf(Tensor<T> init, std::string name) {
  require(!init.empty(), ErrCode::invalid_argument, "leaf '" + name + "' is empty");
  Node n;
  n.kind = OpKind::leaf;
  n.name = std::move(name);
  n.out.push_back(std::move(init));
  ValueRef ref = push(std::move(n));
  leaf_refs_.push_back(ref);
  return ref;
}

template <typename T>
ValueRef Tape<T>::constant(Tensor<T> value, std::string name) {
  require(!value.empty(), ErrCode::invalid_argument, "constant '" + name + "' is empty");
  Node n;
  n.kind = OpKind::constant;
  n.name = std::move(name);
  n.out.push_back(std::move(value));
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::affine(ValueRef x, ValueRef w, ValueRef bias) {
  const Shape& xs = node_of(x).out[x.slot].shape();
  const Shape& ws = node_of(w).out[w.slot].shape();
  const Shape& bs = node_of(bias).out[bias.slot].shape();
  require(xs.size() == 2 && ws.size() == 2 && bs.size() == 1 && xs[1] == ws[1] && ws[0] == bs[0],
          ErrCode::invalid_argument,
          "affine: incompatible shapes x" + shape_str(xs) + " w" + shape_str(ws) + " b" + shape_str(bs));
  Node n;
  n.kind = OpKind::affine;
  n.in = {x, w, bias};
  n.n_in = 3;
  n.out.emplace_back(Shape{xs[0], ws[0]});
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::sine(ValueRef x) {
  Node n;
  n.kind = OpKind::sine;
  n.in = {x};
  n.n_in = 1;
  n.out.emplace_back(node_of(x).out[x.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::relu(ValueRef x) {
  Node n;
  n.kind = OpKind::relu;
  n.in = {x};
  n.n_in = 1;
  n.out.emplace_back(node_of(x).out[x.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::add(ValueRef a, ValueRef b) {
  require(node_of(a).out[a.slot].same_shape(node_of(b).out[b.slot]), ErrCode::invalid_argument,
          "add: shape mismatch " + shape_str(node_of(a).out[a.slot].shape()) + " vs " +
              shape_str(node_of(b).out[b.slot].shape()));
  Node n;
  n.kind = OpKind::add;
  n.in = {a, b};
  n.n_in = 2;
  n.out.emplace_back(node_of(a).out[a.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::sub(ValueRef a, ValueRef b) {
  require(node_of(a).out[a.slot].same_shape(node_of(b).out[b.slot]), ErrCode::invalid_argument,
          "sub: shape mismatch " + shape_str(node_of(a).out[a.slot].shape()) + " vs " +
              shape_str(node_of(b).out[b.slot].shape()));
  Node n;
  n.kind = OpKind::sub;
  n.in = {a, b};
  n.n_in = 2;
  n.out.emplace_back(node_of(a).out[a.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::scalar_mul(ValueRef x, T s) {
  Node n;
  n.kind = OpKind::scalar_mul;
  n.in = {x};
  n.n_in = 1;
  n.scalar = s;
  n.out.emplace_back(node_of(x).out[x.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::mul(ValueRef a, ValueRef b) {
  require(node_of(a).out[a.slot].same_shape(node_of(b).out[b.slot]), ErrCode::invalid_argument,
          "mul: shape mismatch " + shape_str(node_of(a).out[a.slot].shape()) + " vs " +
              shape_str(node_of(b).out[b.slot].shape()));
  Node n;
  n.kind = OpKind::mul;
  n.in = {a, b};
  n.n_in = 2;
  n.out.emplace_back(node_of(a).out[a.slot].shape());
  return push(std::move(n));
}

template <typename T>
ComplexRef Tape<T>::fft2(ComplexRef x) {
  const Shape& s = node_of(x.re).out[x.re.slot].shape();
  require(s.size() == 2 && node_of(x.im).out[x.im.slot].shape() == s, ErrCode::invalid_argument,
          "fft2: expects two rank-2 tensors of equal shape");
  Node n;
  n.kind = OpKind::fft2;
  n.in = {x.re, x.im};
  n.n_in = 2;
  n.out.emplace_back(s);
  n.out.emplace_back(s);
  ValueRef re = push(std::move(n));
  return {re, {re.node, 1}};
}

template <typename T>
ComplexRef Tape<T>::ifft2(ComplexRef x) {
  const Shape& s = node_of(x.re).out[x.re.slot].shape();
  require(s.size() == 2 && node_of(x.im).out[x.im.slot].shape() == s, ErrCode::invalid_argument,
          "ifft2: expects two rank-2 tensors of equal shape");
  Node n;
  n.kind = OpKind::ifft2;
  n.in = {x.re, x.im};
  n.n_in = 2;
  n.out.emplace_back(s);
  n.out.emplace_back(s);
  ValueRef re = push(std::move(n));
  return {re, {re.node, 1}};
}

template <typename T>
ValueRef Tape<T>::mask_select(ValueRef x, std::shared_ptr<const Tensor<T>> mask01) {
  require(mask01 != nullptr && mask01->same_shape(node_of(x).out[x.slot]), ErrCode::invalid_argument,
          "mask_select: mask shape mismatch");
  Node n;
  n.kind = OpKind::mask_select;
  n.in = {x};
  n.n_in = 1;
  n.aux = std::move(mask01);
  n.out.emplace_back(node_of(x).out[x.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::l1_sum(ValueRef x) {
  Node n;
  n.kind = OpKind::l1_sum;
  n.in = {x};
  n.n_in = 1;
  n.out.emplace_back(Shape{1});
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::diff_x(ValueRef image) {
  require(node_of(image).out[image.slot].shape().size() == 2, ErrCode::invalid_argument,
          "diff_x: expects a rank-2 tensor");
  Node n;
  n.kind = OpKind::diff_x;
  n.in = {image};
  n.n_in = 1;
  n.out.emplace_back(node_of(image).out[image.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::diff_y(ValueRef image) {
  require(node_of(image).out[image.slot].shape().size() == 2, ErrCode::invalid_argument,
          "diff_y: expects a rank-2 tensor");
  Node n;
  n.kind = OpKind::diff_y;
  n.in = {image};
  n.n_in = 1;
  n.out.emplace_back(node_of(image).out[image.slot].shape());
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::reshape(ValueRef x, Shape to) {
  require(shape_numel(to) == node_of(x).out[x.slot].numel(), ErrCode::invalid_argument,
          "reshape: element count mismatch " + shape_str(node_of(x).out[x.slot].shape()) +
              " -> " + shape_str(to));
  Node n;
  n.kind = OpKind::reshape;
  n.in = {x};
  n.n_in = 1;
  n.reshape_to = to;
  n.out.emplace_back(std::move(to));
  return push(std::move(n));
}

template <typename T>
ValueRef Tape<T>::basis_apply(std::shared_ptr<const Tensor<T>> basis, ValueRef coeffs) {
  require(basis != nullptr && basis->shape().size() == 2, ErrCode::invalid_argument,
          "basis_apply: basis must be a rank-2 matrix");
  const Shape& cs = node_of(coeffs).out[coeffs.slot].shape();
  require(cs.size() == 1 && cs[0] == basis->shape()[1], ErrCode::invalid_argument,
          "basis_apply: coefficient length does not match basis columns");
  Node n;
  n.kind = OpKind::basis_apply;
  n.in = {coeffs};
  n.n_in = 1;
  n.aux = std::move(basis);
  n.out.emplace_back(Shape{n.aux->shape()[0]});
  return push(std::move(n));
}

// -- forward ------------------------------------------------------------------

template <typename T>
void Tape<T>::compute(Node& n) {
  switch (n.kind) {
    case OpKind::leaf:
    case OpKind::constant:
      break;
    case OpKind::affine: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& w = nodes_[n.in[1].node].out[n.in[1].slot];
      const Tensor<T>& b = nodes_[n.in[2].node].out[n.in[2].slot];
      const int64_t rows = x.shape()[0], in = x.shape()[1], out = w.shape()[0];
      blas::gemm(false, true, rows, out, in, T(1), x.data(), w.data(), T(0), n.out[0].data());
      T* y = n.out[0].data();
      for (int64_t r = 0; r < rows; ++r, y += out)
        for (int64_t c = 0; c < out; ++c) y[c] += b[c];
      break;
    }
    case OpKind::sine: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      simd::vec_sin(x.data(), n.out[0].data(), x.numel());
      break;
    }
    case OpKind::relu: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    }
    case OpKind::add: {
      const Tensor<T>& a = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& b = nodes_[n.in[1].node].out[n.in[1].slot];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < a.numel(); ++i) y[i] = a[i] + b[i];
      break;
    }
    case OpKind::sub: {
      const Tensor<T>& a = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& b = nodes_[n.in[1].node].out[n.in[1].slot];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < a.numel(); ++i) y[i] = a[i] - b[i];
      break;
    }
    case OpKind::scalar_mul: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < x.numel(); ++i) y[i] = n.scalar * x[i];
      break;
    }
    case OpKind::mul: {
      const Tensor<T>& a = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& b = nodes_[n.in[1].node].out[n.in[1].slot];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < a.numel(); ++i) y[i] = a[i] * b[i];
      break;
    }
    case OpKind::fft2:
    case OpKind::ifft2: {
      const Tensor<T>& re = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& im = nodes_[n.in[1].node].out[n.in[1].slot];
      const int64_t d1 = re.shape()[0], d2 = re.shape()[1];
      if (n.kind == OpKind::fft2)
        fft::fft2(d1, d2, re.data(), im.data(), n.out[0].data(), n.out[1].data());
      else
        fft::ifft2(d1, d2, re.data(), im.data(), n.out[0].data(), n.out[1].data());
      break;
    }
    case OpKind::mask_select: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& m = *n.aux;
      T* y = n.out[0].data();
      for (int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] * m[i];
      break;
    }
    case OpKind::l1_sum: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      T acc = T(0);
      for (int64_t i = 0; i < x.numel(); ++i) acc += x[i] >= T(0) ? x[i] : -x[i];
      n.out[0][0] = acc;
      break;
    }
    case OpKind::diff_x: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      const int64_t d1 = x.shape()[0], d2 = x.shape()[1];
      T* y = n.out[0].data();
      for (int64_t i = 0; i + 1 < d1; ++i)
        for (int64_t j = 0; j < d2; ++j) y[i * d2 + j] = x[(i + 1) * d2 + j] - x[i * d2 + j];
      for (int64_t j = 0; j < d2 && d1 > 0; ++j) y[(d1 - 1) * d2 + j] = T(0);
      break;
    }
    case OpKind::diff_y: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      const int64_t d1 = x.shape()[0], d2 = x.shape()[1];
      T* y = n.out[0].data();
      for (int64_t i = 0; i < d1; ++i) {
        for (int64_t j = 0; j + 1 < d2; ++j) y[i * d2 + j] = x[i * d2 + j + 1] - x[i * d2 + j];
        if (d2 > 0) y[i * d2 + d2 - 1] = T(0);
      }
      break;
    }
    case OpKind::reshape: {
      const Tensor<T>& x = nodes_[n.in[0].node].out[n.in[0].slot];
      std::copy(x.data(), x.data() + x.numel(), n.out[0].data());
      break;
    }
    case OpKind::basis_apply: {
      const Tensor<T>& c = nodes_[n.in[0].node].out[n.in[0].slot];
      const Tensor<T>& b = *n.aux;
      blas::gemm(false, false, b.shape()[0], 1, b.shape()[1], T(1), b.data(), c.data(), T(0),
                 n.out[0].data());
      break;
    }
  }
}

template <typename T>
void Tape<T>::forward() {
  for (Node& n : nodes_)
    if (n.kind != OpKind::leaf && n.kind != OpKind::constant) compute(n);
}

// -- backward -----------------------------------------------------------------

template <typename T>
void Tape<T>::backprop(Node& n) {
  // Accumulate into each differentiable input's gradient.
  auto in_val = [&](int i) -> const Tensor<T>& { return nodes_[n.in[i].node].out[n.in[i].slot]; };
  auto in_grad = [&](int i) -> Tensor<T>& { return nodes_[n.in[i].node].grad[n.in[i].slot]; };
  auto in_needs = [&](int i) { return nodes_[n.in[i].node].needs; };

  switch (n.kind) {
    case OpKind::leaf:
    case OpKind::constant:
      break;
    case OpKind::affine: {
      const Tensor<T>& g = n.grad[0];
      const Tensor<T>& x = in_val(0);
      const Tensor<T>& w = in_val(1);
      const int64_t rows = x.shape()[0], in = x.shape()[1], out = w.shape()[0];
      if (in_needs(0))
        blas::gemm(false, false, rows, in, out, T(1), g.data(), w.data(), T(1), in_grad(0).data());
      if (in_needs(1))
        blas::gemm(true, false, out, in, rows, T(1), g.data(), x.data(), T(1), in_grad(1).data());
      if (in_needs(2)) {
        Tensor<T>& bg = in_grad(2);
        const T* gp = g.data();
        for (int64_t r = 0; r < rows; ++r, gp += out)
          for (int64_t c = 0; c < out; ++c) bg[c] += gp[c];
      }
      break;
    }
    case OpKind::sine: {
      if (!in_needs(0)) break;
      const Tensor<T>& x = in_val(0);
      if (n.scratch.empty()) n.scratch.emplace_back(x.shape());
      Tensor<T>& c = n.scratch[0];
      simd::vec_cos(x.data(), c.data(), x.numel());
      Tensor<T>& xg = in_grad(0);
      const Tensor<T>& g = n.grad[0];
      for (int64_t i = 0; i < x.numel(); ++i) xg[i] += c[i] * g[i];
      break;
    }
    case OpKind::relu: {
      if (!in_needs(0)) break;
      const Tensor<T>& x = in_val(0);
      Tensor<T>& xg = in_grad(0);
      const Tensor<T>& g = n.grad[0];
      for (int64_t i = 0; i < x.numel(); ++i) xg[i] += x[i] > T(0) ? g[i] : T(0);
      break;
    }
    case OpKind::add: {
      const Tensor<T>& g = n.grad[0];
      for (int k = 0; k < 2; ++k) {
        if (!in_needs(k)) continue;
        Tensor<T>& ig = in_grad(k);
        for (int64_t i = 0; i < g.numel(); ++i) ig[i] += g[i];
      }
      break;
    }
    case OpKind::sub: {
      const Tensor<T>& g = n.grad[0];
      if (in_needs(0)) {
        Tensor<T>& ig = in_grad(0);
        for (int64_t i = 0; i < g.numel(); ++i) ig[i] += g[i];
      }
      if (in_needs(1)) {
        Tensor<T>& ig = in_grad(1);
        for (int64_t i = 0; i < g.numel(); ++i) ig[i] -= g[i];
      }
      break;
    }
    case OpKind::scalar_mul: {
      if (!in_needs(0)) break;
      const Tensor<T>& g = n.grad[0];
      Tensor<T>& ig = in_grad(0);
      for (int64_t i = 0; i < g.numel(); ++i) ig[i] += n.scalar * g[i];
      break;
    }
    case OpKind::mul: {
      const Tensor<T>& g = n.grad[0];
      if (in_needs(0)) {
        const Tensor<T>& b = in_val(1);
        Tensor<T>& ig = in_grad(0);
        for (int64_t i = 0; i < g.numel(); ++i) ig[i] += b[i] * g[i];
      }
      if (in_needs(1)) {
        const Tensor<T>& a = in_val(0);
        Tensor<T>& ig = in_grad(1);
        for (int64_t i = 0; i < g.numel(); ++i) ig[i] += a[i] * g[i];
      }
      break;
    }
    case OpKind::fft2:
    case OpKind::ifft2: {
      if (!in_needs(0) && !in_needs(1)) break;
      // The unitary DFT is a (complex) unitary linear map, so the adjoint of
      // fft2 is ifft2 applied to the cotangent pair, and vice versa.
      const Tensor<T>& gre = n.grad[0];
      const Tensor<T>& gim = n.grad[1];
      const int64_t d1 = gre.shape()[0], d2 = gre.shape()[1];
      if (n.scratch.empty()) {
        n.scratch.emplace_back(gre.shape());
        n.scratch.emplace_back(gre.shape());
      }
      Tensor<T>& tre = n.scratch[0];
      Tensor<T>& tim = n.scratch[1];
      if (n.kind == OpKind::fft2)
        fft::ifft2(d1, d2, gre.data(), gim.data(), tre.data(), tim.data());
      else
        fft::fft2(d1, d2, gre.data(), gim.data(), tre.data(), tim.data());
      if (in_needs(0)) {
        Tensor<T>& ig = in_grad(0);
        for (int64_t i = 0; i < tre.numel(); ++i) ig[i] += tre[i];
      }
      if (in_needs(1)) {
        Tensor<T>& ig = in_grad(1);
        for (int64_t i = 0; i < tim.numel(); ++i) ig[i] += tim[i];
      }
      break;
    }
    case OpKind::mask_select: {
      if (!in_needs(0)) break;
      const Tensor<T>& g = n.grad[0];
      const Tensor<T>& m = *n.aux;
      Tensor<T>& ig = in_grad(0);
      for (int64_t i = 0; i < g.numel(); ++i) ig[i] += m[i] * g[i];
      break;
    }
    case OpKind::l1_sum: {
      if (!in_needs(0)) break;
      const Tensor<T>& x = in_val(0);
      const T g = n.grad[0][0];
      Tensor<T>& ig = in_grad(0);
      // Subgradient convention: sign(0) = 0.
      for (int64_t i = 0; i < x.numel(); ++i)
        ig[i] += x[i] > T(0) ? g : (x[i] < T(0) ? -g : T(0));
      break;
    }
    case OpKind::diff_x: {
      if (!in_needs(0)) break;
      const Tensor<T>& g = n.grad[0];
      Tensor<T>& ig = in_grad(0);
      const int64_t d1 = g.shape()[0], d2 = g.shape()[1];
      for (int64_t i = 0; i + 1 < d1; ++i)
        for (int64_t j = 0; j < d2; ++j) {
          const T gv = g[i * d2 + j];
          ig[(i + 1) * d2 + j] += gv;
          ig[i * d2 + j] -= gv;
        }
      break;
    }
    case OpKind::diff_y: {
      if (!in_needs(0)) break;
      const Tensor<T>& g = n.grad[0];
      Tensor<T>& ig = in_grad(0);
      const int64_t d1 = g.shape()[0], d2 = g.shape()[1];
      for (int64_t i = 0; i < d1; ++i)
        for (int64_t j = 0; j + 1 < d2; ++j) {
          const T gv = g[i * d2 + j];
          ig[i * d2 + j + 1] += gv;
          ig[i * d2 + j] -= gv;
        }
      break;
    }
    case OpKind::reshape: {
      if (!in_needs(0)) break;
      const Tensor<T>& g = n.grad[0];
      Tensor<T>& ig = in_grad(0);
      for (int64_t i = 0; i < g.numel(); ++i) ig[i] += g[i];
      break;
    }
    case OpKind::basis_apply: {
      if (!in_needs(0)) break;
      const Tensor<T>& b = *n.aux;
      blas::gemm(true, false, b.shape()[1], 1, b.shape()[0], T(1), b.data(), n.grad[0].data(),
                 T(1), in_grad(0).data());
      break;
    }
  }
}

template <typename T>
void Tape<T>::backward(ValueRef loss) {
  check_ref(loss, "backward");
  Node& ln = nodes_[loss.node];
  require(ln.out[loss.slot].numel() == 1, ErrCode::invalid_argument,
          "backward: loss must be a scalar, got " + shape_str(ln.out[loss.slot].shape()));
  require(ln.needs, ErrCode::invalid_argument,
          "backward: loss does not depend on any trainable leaf");

  if (!grads_ready_) {
    for (Node& n : nodes_) {
      n.grad.clear();
      if (!n.needs) continue;
      for (const Tensor<T>& o : n.out) n.grad.emplace_back(o.shape());
    }
    grads_ready_ = true;
  } else {
    for (Node& n : nodes_)
      for (Tensor<T>& g : n.grad) g.fill(T(0));
  }

  ln.grad[loss.slot][0] = T(1);
  for (int32_t k = loss.node; k >= 0; --k)
    if (nodes_[k].needs) backprop(nodes_[k]);
}

// -- access -------------------------------------------------------------------

template <typename T>
const Tensor<T>& Tape<T>::value(ValueRef ref) const {
  check_ref(ref, "value");
  return nodes_[ref.node].out[ref.slot];
}

template <typename T>
Tensor<T>& Tape<T>::leaf_value(ValueRef ref) {
  check_ref(ref, "leaf_value");
  require(nodes_[ref.node].kind == OpKind::leaf, ErrCode::invalid_argument,
          "leaf_value: node is not a leaf");
  return nodes_[ref.node].out[0];
}

template <typename T>
const Tensor<T>& Tape<T>::grad(ValueRef ref) const {
  check_ref(ref, "grad");
  const Node& n = nodes_[ref.node];
  require(grads_ready_ && !n.grad.empty(), ErrCode::invalid_argument,
          "grad: no gradient recorded for this value (run backward first)");
  return n.grad[ref.slot];
}

template <typename T>
const std::string& Tape<T>::name(ValueRef ref) const {
  check_ref(ref, "name");
  return nodes_[ref.node].name;
}

// -- finite differences ---------------------------------------------------------

template <typename T>
FdReport finite_difference_check(Tape<T>& tape, ValueRef loss,
                                 const std::vector<FdEntry>& entries, double step) {
  require(step > 0, ErrCode::invalid_argument, "finite_difference_check: step must be positive");
  tape.forward();
  tape.backward(loss);

  std::vector<double> analytic(entries.size());
  for (size_t e = 0; e < entries.size(); ++e) {
    const Tensor<T>& g = tape.grad(entries[e].leaf);
    require(entries[e].index >= 0 && entries[e].index < g.numel(), ErrCode::invalid_argument,
            "finite_difference_check: index out of range");
    analytic[e] = static_cast<double>(g[entries[e].index]);
  }

  FdReport report;
  for (size_t e = 0; e < entries.size(); ++e) {
    Tensor<T>& v = tape.leaf_value(entries[e].leaf);
    const T saved = v[entries[e].index];
    v[entries[e].index] = saved + static_cast<T>(step);
    tape.forward();
    const double up = static_cast<double>(tape.value(loss)[0]);
    v[entries[e].index] = saved - static_cast<T>(step);
    tape.forward();
    const double down = static_cast<double>(tape.value(loss)[0]);
    v[entries[e].index] = saved;

    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max(std::abs(analytic[e]), std::abs(numeric));
    const double rel = denom == 0.0 ? 0.0 : std::abs(analytic[e] - numeric) / denom;
    ++report.checked;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_leaf = tape.name(entries[e].leaf);
      report.worst_index = entries[e].index;
      report.worst_analytic = analytic[e];
      report.worst_numeric = numeric;
    }
  }
  tape.forward();  // restore values downstream of the probes
  return report;
}

template <typename T>
std::vector<FdEntry> sample_leaf_entries(const Tape<T>& tape, std::span<const ValueRef> leaves,
                                         int64_t count, uint64_t seed) {
  int64_t total = 0;
  for (ValueRef l : leaves) total += tape.value(l).numel();
  require(total > 0, ErrCode::invalid_argument, "sample_leaf_entries: no parameters");
  require(count <= total, ErrCode::invalid_argument,
          "sample_leaf_entries: more samples requested than parameters exist");

  Rng rng(seed);
  std::set<int64_t> chosen;
  while (static_cast<int64_t>(chosen.size()) < count)
    chosen.insert(static_cast<int64_t>(rng.uniform() * static_cast<double>(total)));

  std::vector<FdEntry> entries;
  entries.reserve(chosen.size());
  for (int64_t flat : chosen) {
    int64_t offset = flat;
    for (ValueRef l : leaves) {
      const int64_t n = tape.value(l).numel();
      if (offset < n) {
        entries.push_back({l, offset});
        break;
      }
      offset -= n;
    }
  }
  return entries;
}

template class Tape<float>;
template class Tape<double>;
template FdReport finite_difference_check(Tape<float>&, ValueRef, const std::vector<FdEntry>&,
                                          double);
template FdReport finite_difference_check(Tape<double>&, ValueRef, const std::vector<FdEntry>&,
                                          double);
template std::vector<FdEntry> sample_leaf_entries(const Tape<float>&, std::span<const ValueRef>,
                                                  int64_t, uint64_t);
template std::vector<FdEntry> sample_leaf_entries(const Tape<double>&, std::span<const ValueRef>,
                                                  int64_t, uint64_t);

}  // namespace sirec::ad
