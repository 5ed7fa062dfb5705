#include "mlr/nn/batchnorm.hpp"

#include <cmath>

#include "lane_sum.hpp"

namespace mlr::nn {

using detail::lane_sum;

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                            RunningStats<T>& stats, Mode mode,
                            std::type_identity_t<BatchNormCache<T>>* cache,
                            double momentum, double eps) {
  if (input.rank() != 4) {
    throw ShapeError("batchnorm expects [B,C,H,W], got " + shape_str(input.dims()));
  }
  const std::size_t batch = input.dim(0), ch = input.dim(1);
  const std::size_t plane = input.dim(2) * input.dim(3);
  const std::size_t count = batch * plane;
  require_same_dims(gamma.dims(), Shape{ch}, "batchnorm gamma vs channels");
  require_same_dims(beta.dims(), Shape{ch}, "batchnorm beta vs channels");

  std::vector<double> mean(ch), var(ch);
  if (mode == Mode::train) {
    if (count < 2) {
      throw ShapeError("batchnorm train mode needs B*H*W >= 2 per channel, got " +
                       shape_str(input.dims()));
    }
    for (std::size_t c = 0; c < ch; ++c) {
      double s = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* p = input.data() + (b * ch + c) * plane;
        s += lane_sum<T>(plane, [p](std::size_t i) { return p[i]; });
      }
      const double m = s / static_cast<double>(count);
      double ss = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* p = input.data() + (b * ch + c) * plane;
        const T mt = static_cast<T>(m);
        ss += lane_sum<T>(plane, [p, mt](std::size_t i) { return (p[i] - mt) * (p[i] - mt); });
      }
      mean[c] = m;
      var[c] = ss / static_cast<double>(count);
    }
    if (stats.mean.size() != ch) stats = RunningStats<T>(ch);
    for (std::size_t c = 0; c < ch; ++c) {
      const double unbiased = var[c] * static_cast<double>(count) / static_cast<double>(count - 1);
      if (!stats.initialized) {
        stats.mean[c] = static_cast<T>(mean[c]);
        stats.var[c] = static_cast<T>(unbiased);
      } else {
        stats.mean[c] = static_cast<T>((1 - momentum) * stats.mean[c] + momentum * mean[c]);
        stats.var[c] = static_cast<T>((1 - momentum) * stats.var[c] + momentum * unbiased);
      }
    }
    stats.initialized = true;
  } else {
    if (!stats.initialized || stats.mean.size() != ch) {
      throw UsageError("batchnorm eval mode before running statistics were populated");
    }
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = stats.mean[c];
      var[c] = stats.var[c];
    }
  }

  Tensor<T> out(input.dims());
  BatchNormCache<T> local;
  BatchNormCache<T>& cc = cache ? *cache : local;
  cc.mode = mode;
  cc.inv_std.assign(ch, T(0));
  if (cache) cc.normalized = Tensor<T>(input.dims());
  for (std::size_t c = 0; c < ch; ++c) {
    const double inv = 1.0 / std::sqrt(var[c] + eps);
    cc.inv_std[c] = static_cast<T>(inv);
    const T g = gamma[c], bt = beta[c];
    const T m = static_cast<T>(mean[c]), is = static_cast<T>(inv);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * plane;
      const T* p = input.data() + off;
      T* o = out.data() + off;
      if (cache) {
        T* xh = cc.normalized.data() + off;
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (p[i] - m) * is;
          o[i] = g * xh[i] + bt;
        }
      } else {
        for (std::size_t i = 0; i < plane; ++i) o[i] = g * ((p[i] - m) * is) + bt;
      }
    }
  }
  return out;
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const Tensor<T>& gamma,
                                     const BatchNormCache<T>& cache) {
  if (cache.normalized.empty()) {
    throw UsageError("batchnorm_backward called without a forward cache");
  }
  require_same_dims(grad_out.dims(), cache.normalized.dims(), "batchnorm_backward grad_out");
  const std::size_t batch = grad_out.dim(0), ch = grad_out.dim(1);
  const std::size_t plane = grad_out.dim(2) * grad_out.dim(3);
  const double count = static_cast<double>(batch * plane);
  BatchNormGrads<T> g{Tensor<T>(grad_out.dims()), Tensor<T>(Shape{ch}), Tensor<T>(Shape{ch})};
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_dy = 0, sum_dy_xh = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * plane;
      const T* dy = grad_out.data() + off;
      const T* xh = cache.normalized.data() + off;
      sum_dy += lane_sum<T>(plane, [dy](std::size_t i) { return dy[i]; });
      sum_dy_xh += lane_sum<T>(plane, [dy, xh](std::size_t i) { return dy[i] * xh[i]; });
    }
    g.beta[c] = static_cast<T>(sum_dy);
    g.gamma[c] = static_cast<T>(sum_dy_xh);
    const double scale = static_cast<double>(gamma[c]) * cache.inv_std[c];
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * plane;
      const T* dy = grad_out.data() + off;
      const T* xh = cache.normalized.data() + off;
      T* dx = g.input.data() + off;
      if (cache.mode == Mode::train) {
        const T mean_dy = static_cast<T>(sum_dy / count);
        const T mean_dy_xh = static_cast<T>(sum_dy_xh / count);
        const T s = static_cast<T>(scale);
        for (std::size_t i = 0; i < plane; ++i) dx[i] = s * (dy[i] - mean_dy - xh[i] * mean_dy_xh);
      } else {
        const T s = static_cast<T>(scale);
        for (std::size_t i = 0; i < plane; ++i) dx[i] = s * dy[i];
      }
    }
  }
  return g;
}

template Tensor<float> batchnorm_forward(const Tensor<float>&, const Tensor<float>&,
                                         const Tensor<float>&, RunningStats<float>&, Mode,
                                         BatchNormCache<float>*, double, double);
template Tensor<double> batchnorm_forward(const Tensor<double>&, const Tensor<double>&,
                                          const Tensor<double>&, RunningStats<double>&, Mode,
                                          BatchNormCache<double>*, double, double);
template BatchNormGrads<float> batchnorm_backward(const Tensor<float>&, const Tensor<float>&,
                                                  const BatchNormCache<float>&);
template BatchNormGrads<double> batchnorm_backward(const Tensor<double>&, const Tensor<double>&,
                                                   const BatchNormCache<double>&);

}  // namespace mlr::nn
