#include "mlr/nn/loss.hpp"

namespace mlr::nn {

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_dims(pred.dims(), target.dims(), "mse_loss pred vs target");
  LossResult<T> r{0.0, Tensor<T>(pred.dims())};
  const double n = static_cast<double>(pred.size());
  const T scale = static_cast<T>(2.0 / n);
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T d = pred[i] - target[i];
    sum += static_cast<double>(d) * d;
    r.grad[i] = scale * d;
  }
  r.loss = sum / n;
  return r;
}

template LossResult<float> mse_loss(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> mse_loss(const Tensor<double>&, const Tensor<double>&);

}  // namespace mlr::nn
