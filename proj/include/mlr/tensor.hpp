#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mlr/error.hpp"

namespace mlr {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& dims);
std::size_t shape_size(const Shape& dims);

/// Dense row-major N-d array. Training runs on Tensor<float>, gradient
/// verification on Tensor<double>; persistence is always 32-bit.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape dims, T fill = T(0))
      : dims_(std::move(dims)), data_(checked_size(dims_), fill) {}

  Tensor(Shape dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (checked_size(dims_) != data_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + shape_str(dims_));
    }
  }

  const Shape& dims() const { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 4-D accessor for [B, C, H, W] tensors.
  T& operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((b * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }
  const T& operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((b * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }

  // 2-D accessor for [rows, cols] tensors.
  T& operator()(std::size_t r, std::size_t c) { return data_[r * dims_[1] + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * dims_[1] + c]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Same data, new dims of equal element count.
  Tensor reshaped(Shape dims) const {
    if (checked_size(dims) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_str(dims_) + " to " + shape_str(dims));
    }
    Tensor out;
    out.dims_ = std::move(dims);
    out.data_ = data_;
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(dims_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_size(const Shape& dims) {
    for (auto d : dims) {
      if (d == 0) throw ShapeError("tensor dims must be positive, got " + shape_str(dims));
    }
    return shape_size(dims);
  }

  Shape dims_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

/// Throws ShapeError unless a and b have identical dims.
void require_same_dims(const Shape& a, const Shape& b, const char* what);

/// Throws NumericError naming `what` if any value is NaN or infinite.
template <typename T>
void require_finite(const Tensor<T>& t, const std::string& what);

}  // namespace mlr
