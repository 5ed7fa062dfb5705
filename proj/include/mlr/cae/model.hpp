#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlr/cae/architecture.hpp"
#include "mlr/nn/batchnorm.hpp"
#include "mlr/nn/pool.hpp"

namespace mlr::cae {

using nn::Mode;

inline constexpr double kDefaultInitStd = 0.05;

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// Running statistics of one batchnorm layer, addressed by layer prefix.
template <typename T>
struct NamedStats {
  std::string name;  // e.g. "encoder.0.bn"
  nn::RunningStats<T> stats;
};

/// Convolutional autoencoder over [B, 1, N, M] inputs.
///
/// Parameters are named "<encoder|decoder>.<i>.conv.weight|bias" and
/// "<...>.bn.gamma|beta". Conv weights start N(0, init_std^2) from per-tensor
/// seeds derived from `seed`; biases and beta start at 0, gamma at 1. Running
/// statistics start at mean 0 / var 1 and count as populated, so an untrained
/// model can encode.
template <typename T>
class CaeModel {
 public:
  CaeModel(CaeArchitecture arch, Extent2 input, std::uint64_t seed,
           double init_std = kDefaultInitStd);

  const CaeArchitecture& architecture() const { return arch_; }
  Extent2 input_extent() const { return chain_.input; }
  const ShapeChain& shape_chain() const { return chain_; }
  std::size_t code_size() const { return chain_.code_size(); }
  /// {C, H, W} of the code before flattening.
  Shape code_dims() const;

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  Parameter<T>& parameter(const std::string& name);
  const Parameter<T>& parameter(const std::string& name) const;
  std::vector<NamedStats<T>>& running_stats() { return stats_; }
  const std::vector<NamedStats<T>>& running_stats() const { return stats_; }
  std::size_t parameter_count() const;

  /// Full reconstruction pass. Train mode uses batch statistics and updates
  /// the running ones. Caches activations for backward().
  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  /// Writes every parameter gradient and returns d loss / d input. Needs a
  /// preceding forward().
  Tensor<T> backward(const Tensor<T>& grad_reconstruction);

  /// Eval-mode encoder: [B, 1, N, M] -> [B, K], flattened over (C, H, W).
  Tensor<T> encode(const Tensor<T>& x) const;
  /// Eval-mode decoder: [B, K] -> [B, 1, N, M].
  Tensor<T> decode(const Tensor<T>& code) const;

  template <typename U>
  CaeModel<U> cast() const;

 private:
  template <typename U>
  friend class CaeModel;

  struct LayerRefs {
    std::size_t weight = 0, bias = 0, gamma = 0, beta = 0;
    int stats = -1;
  };
  struct LayerCache {
    Shape upsample_in;
    Tensor<T> conv_in;
    nn::BatchNormCache<T> bn;
    Tensor<T> act_in;
    Tensor<T> act_out;
    nn::ArgmaxMap argmax;
    Shape pool_in;
  };

  CaeModel() = default;
  void check_input(const Tensor<T>& x) const;
  Tensor<T> run_layer(bool encoder, std::size_t i, Tensor<T> x, std::vector<NamedStats<T>>& stats,
                      Mode mode, LayerCache* cache) const;
  Tensor<T> back_layer(bool encoder, std::size_t i, const Tensor<T>& grad, const LayerCache& cache);
  Tensor<T> run_encoder(const Tensor<T>& x, std::vector<NamedStats<T>>& stats, Mode mode,
                        std::vector<LayerCache>* caches) const;
  Tensor<T> run_decoder(const Tensor<T>& code, std::vector<NamedStats<T>>& stats, Mode mode,
                        std::vector<LayerCache>* caches) const;

  CaeArchitecture arch_;
  ShapeChain chain_;
  std::vector<Parameter<T>> params_;
  std::vector<NamedStats<T>> stats_;
  std::vector<LayerRefs> enc_refs_, dec_refs_;
  std::vector<LayerCache> enc_cache_, dec_cache_;
  bool has_cache_ = false;
};

using CaeModelF = CaeModel<float>;
using CaeModelD = CaeModel<double>;

/// Encoder/decoder/total counts taken from the model's own tensors.
ParamBreakdown count_parameters(const CaeModel<float>& model);

}  // namespace mlr::cae
