#pragma once

#include <cstdint>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::nn {

/// Winning flat input index for every pooled output cell, plus the input dims
/// the indices refer to.
struct ArgmaxMap {
  Shape input_dims;
  Shape output_dims;
  std::vector<std::uint32_t> index;
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  ArgmaxMap argmax;
};

/// 2x2 / stride-2 max pooling with floor semantics (odd trailing row/col is
/// dropped). Ties go to the first cell in row-major window order.
template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const ArgmaxMap& argmax,
                              const Shape& input_dims);

/// Nearest-neighbour expansion to an exact target extent:
/// out[y,x] = in[floor(y*h/H), floor(x*w/W)].
template <typename T>
Tensor<T> upsample_to_forward(const Tensor<T>& input, std::size_t target_h, std::size_t target_w);

/// Adjoint of upsample_to_forward: sums each output gradient into its source cell.
template <typename T>
Tensor<T> upsample_to_backward(const Tensor<T>& grad_out, const Shape& input_dims);

}  // namespace mlr::nn
