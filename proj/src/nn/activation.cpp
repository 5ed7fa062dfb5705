#include "mlr/nn/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/SpecialFunctions>

namespace mlr::nn {

namespace {

template <typename T>
inline T gelu_scalar(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * static_cast<T>(std::numbers::sqrt2 / 2)));
}

// Packet math on fixed aligned chunks, so every element takes the same code path
// whatever the buffer alignment or length.
constexpr std::size_t kChunk = 16;
template <typename T>
using Chunk = Eigen::Array<T, kChunk, 1>;

template <typename T, typename F>
void chunked(std::size_t n, const T* a, const T* b, T* out, F&& f) {
  Chunk<T> ca, cb, co;
  for (std::size_t i = 0; i < n; i += kChunk) {
    const std::size_t len = std::min(kChunk, n - i);
    ca.setZero();
    cb.setZero();
    std::copy(a + i, a + i + len, ca.data());
    if (b) std::copy(b + i, b + i + len, cb.data());
    co = f(ca, cb);
    std::copy(co.data(), co.data() + len, out + i);
  }
}

template <typename T>
inline T sigmoid_scalar(T x) {
  // Split by sign so exp never overflows.
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

double gelu(double x) { return gelu_scalar(x); }
double sigmoid(double x) { return sigmoid_scalar(x); }

template <typename T>
Tensor<T> gelu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.dims());
  chunked<T>(input.size(), input.data(), nullptr, out.data(), [](const Chunk<T>& x, const Chunk<T>&) {
    return Chunk<T>(T(0.5) * x * (T(1) + (x * static_cast<T>(std::numbers::sqrt2 / 2)).erf()));
  });
  return out;
}

template <typename T>
Tensor<T> gelu_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input) {
  if (cached_input.empty()) throw UsageError("gelu_backward called without a forward cache");
  require_same_dims(grad_out.dims(), cached_input.dims(), "gelu_backward");
  Tensor<T> g(grad_out.dims());
  const T pdf_scale = static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
  chunked<T>(g.size(), cached_input.data(), grad_out.data(), g.data(),
             [pdf_scale](const Chunk<T>& x, const Chunk<T>& go) {
               return Chunk<T>(go * (T(0.5) * (T(1) + (x * static_cast<T>(std::numbers::sqrt2 / 2)).erf()) +
                                     x * pdf_scale * (T(-0.5) * x.square()).exp()));
             });
  return g;
}

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& input) {
  Tensor<T> out(input.dims());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = sigmoid_scalar(input[i]);
  return out;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_output) {
  if (cached_output.empty()) throw UsageError("sigmoid_backward called without a forward cache");
  require_same_dims(grad_out.dims(), cached_output.dims(), "sigmoid_backward");
  Tensor<T> g(grad_out.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const T s = cached_output[i];
    g[i] = grad_out[i] * s * (T(1) - s);
  }
  return g;
}

template <typename T>
Tensor<T> activation_forward(Activation a, const Tensor<T>& input) {
  switch (a) {
    case Activation::gelu: return gelu_forward(input);
    case Activation::sigmoid: return sigmoid_forward(input);
    case Activation::identity: break;
  }
  return input;
}

template <typename T>
Tensor<T> activation_backward(Activation a, const Tensor<T>& grad_out,
                              const Tensor<T>& cached_input, const Tensor<T>& cached_output) {
  switch (a) {
    case Activation::gelu: return gelu_backward(grad_out, cached_input);
    case Activation::sigmoid: return sigmoid_backward(grad_out, cached_output);
    case Activation::identity: break;
  }
  return grad_out;
}

#define MLR_INSTANTIATE(T)                                                                      \
  template Tensor<T> gelu_forward(const Tensor<T>&);                                            \
  template Tensor<T> gelu_backward(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> sigmoid_forward(const Tensor<T>&);                                         \
  template Tensor<T> sigmoid_backward(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> activation_forward(Activation, const Tensor<T>&);                          \
  template Tensor<T> activation_backward(Activation, const Tensor<T>&, const Tensor<T>&,        \
                                         const Tensor<T>&);
MLR_INSTANTIATE(float)
MLR_INSTANTIATE(double)
#undef MLR_INSTANTIATE

}  // namespace mlr::nn
