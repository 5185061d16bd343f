#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace sirec::ad {

/// Closed set of operations the reverse-mode tape understands.  The forward
/// model and both loss terms compose entirely out of these.
enum class OpKind : uint8_t {
  leaf,         ///< trainable parameter tensor
  constant,     ///< fixed tensor (grids, measured data)
  affine,       ///< X (b x in), W (out x in), bias (out) -> X W^T + bias
  sine,         ///< elementwise sin
  relu,         ///< elementwise max(0, x)
  add,          ///< elementwise a + b (same shape)
  sub,          ///< elementwise a - b (same shape)
  scalar_mul,   ///< s * x for a fixed scalar s
  mul,          ///< elementwise a * b (same shape)
  fft2,         ///< unitary 2D DFT of a split-complex pair, two outputs
  ifft2,        ///< unitary inverse 2D DFT, two outputs
  mask_select,  ///< x * m for a fixed 0/1 mask m
  l1_sum,       ///< sum of |x_i|, scalar output, subgradient sign(0) = 0
  diff_x,       ///< forward difference along axis 0, replicate boundary
  diff_y,       ///< forward difference along axis 1, replicate boundary
  reshape,      ///< same data, new shape
  basis_apply,  ///< fixed matrix B (n x k) times coefficient vector (k) -> (n)
};

/// Handle to one output slot of one recorded node.  Slot is nonzero only for
/// the two-output transform nodes (0 = real part, 1 = imaginary part).
struct ValueRef {
  int32_t node = -1;
  int32_t slot = 0;
  bool valid() const noexcept { return node >= 0; }
};

/// A split-complex value: two same-shaped real tensors on the tape.
struct ComplexRef {
  ValueRef re, im;
};

/// Reverse-mode tape over tensors of scalar type T (float or double).
///
/// Usage: record the graph once (each builder validates shapes and computes
/// the node's value immediately), then alternate forward() / backward() /
/// parameter updates for as many iterations as needed.  No memory is
/// allocated after the first backward(), so iteration cost is stable.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // -- graph construction ---------------------------------------------------
  ValueRef leaf(Tensor<T> init, std::string name);
  ValueRef constant(Tensor<T> value, std::string name = {});

  ValueRef affine(ValueRef x, ValueRef w, ValueRef bias);
  ValueRef sine(ValueRef x);
  ValueRef relu(ValueRef x);
  ValueRef add(ValueRef a, ValueRef b);
  ValueRef sub(ValueRef a, ValueRef b);
  ValueRef scalar_mul(ValueRef x, T s);
  ValueRef mul(ValueRef a, ValueRef b);
  ComplexRef fft2(ComplexRef x);
  ComplexRef ifft2(ComplexRef x);
  ValueRef mask_select(ValueRef x, std::shared_ptr<const Tensor<T>> mask01);
  ValueRef l1_sum(ValueRef x);
  ValueRef diff_x(ValueRef image);
  ValueRef diff_y(ValueRef image);
  ValueRef reshape(ValueRef x, Shape to);
  ValueRef basis_apply(std::shared_ptr<const Tensor<T>> basis, ValueRef coeffs);

  // -- execution --------------------------------------------------------------
  /// Recompute every non-leaf node, in recording order.
  void forward();
  /// Accumulate d(loss)/d(node) for every node that can influence the scalar
  /// loss; leaf gradients are then available through grad().
  void backward(ValueRef loss);

  // -- access -----------------------------------------------------------------
  const Tensor<T>& value(ValueRef ref) const;
  /// Mutable view of a leaf's value, for in-place optimizer updates.
  Tensor<T>& leaf_value(ValueRef ref);
  /// Gradient of the last backward() target w.r.t. this value.
  const Tensor<T>& grad(ValueRef ref) const;
  const std::string& name(ValueRef ref) const;

  std::span<const ValueRef> leaves() const { return leaf_refs_; }
  int64_t node_count() const { return static_cast<int64_t>(nodes_.size()); }

 private:
  struct Node {
    OpKind kind;
    std::array<ValueRef, 3> in{};
    int n_in = 0;
    T scalar{};
    std::shared_ptr<const Tensor<T>> aux;  // mask01 / basis matrix
    Shape reshape_to;
    std::string name;
    bool needs = false;  // reachable from a trainable leaf
    std::vector<Tensor<T>> out;
    std::vector<Tensor<T>> grad;
    std::vector<Tensor<T>> scratch;  // persistent temporaries for backward
  };

  const Node& node_of(ValueRef ref) const;
  ValueRef push(Node node);
  void compute(Node& n);
  void backprop(Node& n);
  bool needs_of(ValueRef ref) const { return nodes_[ref.node].needs; }
  void check_ref(ValueRef ref, const char* where) const;

  std::vector<Node> nodes_;
  std::vector<ValueRef> leaf_refs_;
  bool grads_ready_ = false;
};

/// Multiply two split-complex values; composes four real multiplies with one
/// add and one subtract on the tape.
template <typename T>
ComplexRef complex_mul(Tape<T>& tape, ComplexRef a, ComplexRef b) {
  ValueRef rr = tape.mul(a.re, b.re);
  ValueRef ii = tape.mul(a.im, b.im);
  ValueRef ri = tape.mul(a.re, b.im);
  ValueRef ir = tape.mul(a.im, b.re);
  return {tape.sub(rr, ii), tape.add(ri, ir)};
}

// -- finite-difference verification ------------------------------------------

struct FdEntry {
  ValueRef leaf;
  int64_t index = 0;
};

struct FdReport {
  double max_rel_err = 0.0;
  int64_t checked = 0;
  std::string worst_leaf;
  int64_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compare analytic leaf gradients against central differences of the scalar
/// loss.  Relative error per entry is |a - n| / max(|a|, |n|), defined as 0
/// when both vanish.  The tape is restored to its original state.
template <typename T>
FdReport finite_difference_check(Tape<T>& tape, ValueRef loss,
                                 const std::vector<FdEntry>& entries, double step);

/// Draw `count` (leaf, flat index) pairs, uniformly over the concatenated
/// parameter vector, deterministically from `seed`.
template <typename T>
std::vector<FdEntry> sample_leaf_entries(const Tape<T>& tape,
                                         std::span<const ValueRef> leaves,
                                         int64_t count, uint64_t seed);

extern template class Tape<float>;
extern template class Tape<double>;
extern template FdReport finite_difference_check(Tape<float>&, ValueRef,
                                                 const std::vector<FdEntry>&, double);
extern template FdReport finite_difference_check(Tape<double>&, ValueRef,
                                                 const std::vector<FdEntry>&, double);
extern template std::vector<FdEntry> sample_leaf_entries(const Tape<float>&,
                                                         std::span<const ValueRef>,
                                                         int64_t, uint64_t);
extern template std::vector<FdEntry> sample_leaf_entries(const Tape<double>&,
                                                         std::span<const ValueRef>,
                                                         int64_t, uint64_t);

}  // namespace sirec::ad
