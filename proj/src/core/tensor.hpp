#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace sirec {

/// Dense row-major tensor shape.  Rank is small (1 or 2 everywhere in this
/// engine) so a plain vector is fine.
using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

/// Dense row-major tensor of a single real scalar type.  Complex quantities
/// are represented as two tensors (real and imaginary part) throughout the
/// differentiable graph.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    require(static_cast<int64_t>(data_.size()) == shape_numel(shape_),
            ErrCode::internal, "tensor data does not match shape " + shape_str(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  int64_t numel() const noexcept { return static_cast<int64_t>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  T& operator[](int64_t i) noexcept { return data_[i]; }
  const T& operator[](int64_t i) const noexcept { return data_[i]; }

  std::vector<T>& vec() noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

 private:
  Shape shape_;
  std::vector<T> data_;
};

}  // namespace sirec
