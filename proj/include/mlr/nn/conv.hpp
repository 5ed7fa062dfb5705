#pragma once

#include <string>

#include "mlr/tensor.hpp"

namespace mlr::nn {

struct Extent2 {
  int h = 0;
  int w = 0;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

enum class Activation { gelu, sigmoid, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct ConvLayerSpec {
  int in_channels = 1;
  int out_channels = 1;
  Extent2 kernel{1, 1};
  Extent2 padding{0, 0};
  Extent2 stride{1, 1};
  bool has_batchnorm = false;
  Activation activation = Activation::identity;

  /// Throws ShapeError if kernel/stride are not positive or padding negative.
  void validate() const;

  /// Output spatial extent for an input of `in`; throws ShapeError when the
  /// padded input is smaller than the kernel.
  Extent2 output_extent(Extent2 in) const;

  /// Trainable weight+bias count (batchnorm excluded).
  std::size_t conv_parameter_count() const;

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

/// Cross-correlation of [B,C,H,W] input with [O,C,kh,kw] weights plus bias.
/// Lowered to im2col + GEMM per sample.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         const ConvLayerSpec& spec);

/// `cached_input` is the tensor given to the matching forward call; an empty
/// tensor signals a missing cache and raises UsageError.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const Tensor<T>& weights, const ConvLayerSpec& spec);

}  // namespace mlr::nn
