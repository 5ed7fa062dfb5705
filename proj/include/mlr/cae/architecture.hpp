#pragma once

#include <string>
#include <vector>

#include "mlr/nn/conv.hpp"

namespace mlr::cae {

using nn::ConvLayerSpec;
using nn::Extent2;

/// Encoder layers run conv -> batchnorm -> activation -> 2x2 max-pool.
/// Decoder layer i first upsamples to the pre-pool extent of encoder layer
/// L-1-i, then runs conv -> batchnorm -> activation.
struct CaeArchitecture {
  std::vector<ConvLayerSpec> encoder;
  std::vector<ConvLayerSpec> decoder;

  /// Batchnorm on every layer except the code conv and the output conv.
  static CaeArchitecture reference();
  /// Batchnorm on the code conv as well.
  static CaeArchitecture full_batchnorm();

  /// Channel continuity and layer-count checks; throws ConfigError.
  void validate() const;

  friend bool operator==(const CaeArchitecture&, const CaeArchitecture&) = default;
};

struct StageShape {
  std::string name;
  Extent2 in;
  Extent2 conv_out;  // before pooling (encoder) / after conv (decoder)
  Extent2 out;
  int channels = 0;
};

struct ShapeChain {
  Extent2 input;
  std::vector<StageShape> encoder;
  std::vector<StageShape> decoder;

  Extent2 code_extent() const { return encoder.back().out; }
  int code_channels() const { return encoder.back().channels; }
  std::size_t code_size() const;
};

/// Closed-form dims through every stage. Throws ShapeError naming the first
/// stage that cannot be applied (or whose decoder output misses the mirror).
ShapeChain compute_shape_chain(const CaeArchitecture& arch, Extent2 input);

struct ParamCount {
  std::string name;
  std::size_t count = 0;
};

struct ParamBreakdown {
  std::vector<ParamCount> layers;
  std::size_t encoder_total = 0;
  std::size_t decoder_total = 0;
  std::size_t total = 0;
};

/// Trainable parameters only: conv weights and biases, batchnorm gamma and
/// beta. Running statistics are not counted.
ParamBreakdown count_parameters(const CaeArchitecture& arch);

/// Flat float encoding used by the weights file.
std::vector<float> encode_architecture(const CaeArchitecture& arch);
CaeArchitecture decode_architecture(const std::vector<float>& v);

}  // namespace mlr::cae
