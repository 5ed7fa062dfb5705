#pragma once

#include "mlr/nn/conv.hpp"
#include "mlr/tensor.hpp"

namespace mlr::nn {

/// Exact GELU, x * Phi(x) with Phi the standard normal CDF (erf form).
template <typename T>
Tensor<T> gelu_forward(const Tensor<T>& input);

/// Gradient w.r.t. the GELU input: Phi(x) + x * phi(x).
template <typename T>
Tensor<T> gelu_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input);

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& input);

/// Takes the forward *output* s, since d/dx sigmoid = s(1-s).
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_output);

/// Dispatch on Activation. For identity the forward returns a copy and the
/// backward passes the gradient through.
template <typename T>
Tensor<T> activation_forward(Activation a, const Tensor<T>& input);

/// `cached_input` / `cached_output` are the forward's argument and result.
template <typename T>
Tensor<T> activation_backward(Activation a, const Tensor<T>& grad_out,
                              const Tensor<T>& cached_input, const Tensor<T>& cached_output);

/// Scalar helpers shared with the classifier.
double gelu(double x);
double sigmoid(double x);

}  // namespace mlr::nn
