#pragma once

#include "mlr/tensor.hpp"

namespace mlr::nn {

template <typename T>
struct LossResult {
  double loss = 0;
  Tensor<T> grad;
};

/// Mean squared error over every element; grad = 2 (pred - target) / count.
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace mlr::nn
