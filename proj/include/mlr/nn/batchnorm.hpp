#pragma once

#include <type_traits>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::nn {

enum class Mode { train, eval };

inline constexpr double kBatchNormMomentum = 0.1;
// Small enough that a unit-variance channel normalizes to variance 1 within 1e-6.
inline constexpr double kBatchNormEps = 1e-7;

/// Per-channel running statistics. `initialized` is false until the first
/// train-mode update (or an explicit load); eval mode refuses to run before.
template <typename T>
struct RunningStats {
  Tensor<T> mean;
  Tensor<T> var;
  bool initialized = false;

  RunningStats() = default;
  explicit RunningStats(std::size_t channels)
      : mean(Shape{channels}, T(0)), var(Shape{channels}, T(1)) {}
};

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::train;
  Tensor<T> normalized;
  std::vector<T> inv_std;
};

template <typename T>
struct BatchNormGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

/// Per-channel normalization over (B,H,W). Train mode uses batch statistics
/// and updates `stats` with `momentum` (unbiased variance); eval mode reads
/// `stats`. `cache` may be null for inference-only calls.
template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                            RunningStats<T>& stats, Mode mode,
                            std::type_identity_t<BatchNormCache<T>>* cache,
                            double momentum = kBatchNormMomentum, double eps = kBatchNormEps);

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const Tensor<T>& gamma,
                                     const BatchNormCache<T>& cache);

}  // namespace mlr::nn
