#include "mlr/cae/architecture.hpp"

#include <cmath>

namespace mlr::cae {

namespace {

using nn::Activation;

std::string extent_str(Extent2 e) { return std::to_string(e.h) + "x" + std::to_string(e.w); }

ConvLayerSpec layer(int in, int out, int k, int pad, bool bn, Activation act) {
  ConvLayerSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = {k, k};
  s.padding = {pad, pad};
  s.stride = {1, 1};
  s.has_batchnorm = bn;
  s.activation = act;
  return s;
}

CaeArchitecture build(bool code_bn) {
  const int channels[] = {1, 32, 64, 128, 10};
  const int kernels[] = {3, 3, 5, 5};
  constexpr int pad = 2;
  CaeArchitecture a;
  for (int i = 0; i < 4; ++i) {
    const bool bn = i < 3 || code_bn;
    a.encoder.push_back(layer(channels[i], channels[i + 1], kernels[i], pad, bn, Activation::gelu));
  }
  // Mirror: padding k-1-p turns each conv back into its encoder input extent.
  for (int i = 3; i >= 0; --i) {
    const bool last = i == 0;
    a.decoder.push_back(layer(channels[i + 1], channels[i], kernels[i], kernels[i] - 1 - pad, !last,
                              last ? Activation::sigmoid : Activation::gelu));
  }
  return a;
}

}  // namespace

CaeArchitecture CaeArchitecture::reference() { return build(false); }
CaeArchitecture CaeArchitecture::full_batchnorm() { return build(true); }

void CaeArchitecture::validate() const {
  if (encoder.empty()) throw ConfigError("architecture needs at least one encoder layer");
  if (decoder.size() != encoder.size()) {
    throw ConfigError("decoder has " + std::to_string(decoder.size()) + " layers, encoder has " +
                      std::to_string(encoder.size()));
  }
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    try {
      encoder[i].validate();
      decoder[i].validate();
    } catch (const ShapeError& e) {
      throw ConfigError("layer " + std::to_string(i) + ": " + e.what());
    }
    if (encoder[i].stride != Extent2{1, 1} || decoder[i].stride != Extent2{1, 1}) {
      throw ConfigError("only unit strides are supported");
    }
  }
  for (std::size_t i = 1; i < encoder.size(); ++i) {
    if (encoder[i].in_channels != encoder[i - 1].out_channels) {
      throw ConfigError("encoder channel mismatch at layer " + std::to_string(i));
    }
    if (decoder[i].in_channels != decoder[i - 1].out_channels) {
      throw ConfigError("decoder channel mismatch at layer " + std::to_string(i));
    }
  }
  if (decoder.front().in_channels != encoder.back().out_channels) {
    throw ConfigError("decoder input channels must equal code channels");
  }
  if (decoder.back().out_channels != encoder.front().in_channels) {
    throw ConfigError("decoder output channels must equal input channels");
  }
}

std::size_t ShapeChain::code_size() const {
  const auto e = code_extent();
  return static_cast<std::size_t>(code_channels()) * e.h * e.w;
}

ShapeChain compute_shape_chain(const CaeArchitecture& arch, Extent2 input) {
  arch.validate();
  ShapeChain chain;
  chain.input = input;
  Extent2 cur = input;
  for (std::size_t i = 0; i < arch.encoder.size(); ++i) {
    StageShape st;
    st.name = "encoder." + std::to_string(i);
    st.in = cur;
    st.channels = arch.encoder[i].out_channels;
    try {
      st.conv_out = arch.encoder[i].output_extent(cur);
    } catch (const ShapeError& e) {
      throw ShapeError(st.name + " conv: input " + extent_str(cur) + " too small (" + e.what() + ")");
    }
    if (st.conv_out.h < 2 || st.conv_out.w < 2) {
      throw ShapeError(st.name + " pool: " + extent_str(st.conv_out) +
                       " is too small for 2x2 pooling (input " + extent_str(input) + ")");
    }
    st.out = {st.conv_out.h / 2, st.conv_out.w / 2};
    cur = st.out;
    chain.encoder.push_back(st);
  }
  const std::size_t n = arch.encoder.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mirror = chain.encoder[n - 1 - i];
    StageShape st;
    st.name = "decoder." + std::to_string(i);
    st.in = mirror.conv_out;  // upsample target
    st.channels = arch.decoder[i].out_channels;
    try {
      st.conv_out = arch.decoder[i].output_extent(st.in);
    } catch (const ShapeError& e) {
      throw ShapeError(st.name + " conv: " + e.what());
    }
    if (st.conv_out != mirror.in) {
      throw ShapeError(st.name + " produces " + extent_str(st.conv_out) + ", mirror expects " +
                       extent_str(mirror.in));
    }
    st.out = st.conv_out;
    chain.decoder.push_back(st);
  }
  return chain;
}

ParamBreakdown count_parameters(const CaeArchitecture& arch) {
  ParamBreakdown b;
  auto add = [&](const std::string& prefix, const ConvLayerSpec& s, std::size_t& total) {
    b.layers.push_back({prefix + ".conv", s.conv_parameter_count()});
    total += s.conv_parameter_count();
    if (s.has_batchnorm) {
      const std::size_t bn = 2 * static_cast<std::size_t>(s.out_channels);
      b.layers.push_back({prefix + ".bn", bn});
      total += bn;
    }
  };
  for (std::size_t i = 0; i < arch.encoder.size(); ++i) {
    add("encoder." + std::to_string(i), arch.encoder[i], b.encoder_total);
  }
  for (std::size_t i = 0; i < arch.decoder.size(); ++i) {
    add("decoder." + std::to_string(i), arch.decoder[i], b.decoder_total);
  }
  b.total = b.encoder_total + b.decoder_total;
  return b;
}

namespace {
constexpr int kFieldsPerLayer = 10;
}

std::vector<float> encode_architecture(const CaeArchitecture& arch) {
  std::vector<float> v{static_cast<float>(arch.encoder.size()),
                       static_cast<float>(arch.decoder.size())};
  for (const auto* part : {&arch.encoder, &arch.decoder}) {
    for (const auto& s : *part) {
      for (int x : {s.in_channels, s.out_channels, s.kernel.h, s.kernel.w, s.padding.h, s.padding.w,
                    s.stride.h, s.stride.w, static_cast<int>(s.has_batchnorm),
                    static_cast<int>(s.activation)}) {
        v.push_back(static_cast<float>(x));
      }
    }
  }
  return v;
}

CaeArchitecture decode_architecture(const std::vector<float>& v) {
  auto as_int = [&](std::size_t i) {
    const float f = v.at(i);
    if (!(f >= 0) || f != std::floor(f) || f > 1e6f) {
      throw FormatError("architecture field " + std::to_string(i) + " is not a small integer");
    }
    return static_cast<int>(f);
  };
  if (v.size() < 2) throw FormatError("architecture record too short");
  const auto ne = static_cast<std::size_t>(as_int(0));
  const auto nd = static_cast<std::size_t>(as_int(1));
  if (v.size() != 2 + kFieldsPerLayer * (ne + nd)) {
    throw FormatError("architecture record has " + std::to_string(v.size()) + " fields for " +
                      std::to_string(ne) + "+" + std::to_string(nd) + " layers");
  }
  CaeArchitecture a;
  std::size_t at = 2;
  for (std::size_t l = 0; l < ne + nd; ++l) {
    ConvLayerSpec s;
    s.in_channels = as_int(at);
    s.out_channels = as_int(at + 1);
    s.kernel = {as_int(at + 2), as_int(at + 3)};
    s.padding = {as_int(at + 4), as_int(at + 5)};
    s.stride = {as_int(at + 6), as_int(at + 7)};
    s.has_batchnorm = as_int(at + 8) != 0;
    const int act = as_int(at + 9);
    if (act > static_cast<int>(nn::Activation::identity)) {
      throw FormatError("unknown activation code " + std::to_string(act));
    }
    s.activation = static_cast<nn::Activation>(act);
    (l < ne ? a.encoder : a.decoder).push_back(s);
    at += kFieldsPerLayer;
  }
  try {
    a.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("stored architecture is invalid: ") + e.what());
  }
  return a;
}

}  // namespace mlr::cae
