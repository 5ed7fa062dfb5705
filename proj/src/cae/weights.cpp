#include "mlr/cae/weights.hpp"

#include <algorithm>
#include <cmath>

namespace mlr::cae {

namespace {

const std::string kArch = "meta/architecture";
const std::string kInput = "meta/input_dims";
const std::string kScalerPrefix = "meta/scaler/";
const std::string kFittedOnPrefix = "meta/scaler_fitted_on/";
const std::string kBlockPrefix = "meta/block/";

TensorF vec_tensor(const std::vector<double>& v) {
  return TensorF({v.size()}, std::vector<float>(v.begin(), v.end()));
}

std::vector<double> tensor_vec(const TensorF& t) { return {t.values().begin(), t.values().end()}; }

bool is_model_tensor(const std::string& name) {
  return name == kArch || name == kInput || name.starts_with("encoder.") ||
         name.starts_with("decoder.");
}

}  // namespace

std::vector<NamedTensor> model_tensors(const CaeModelF& model) {
  std::vector<NamedTensor> out;
  const auto arch = encode_architecture(model.architecture());
  out.push_back({kArch, TensorF({arch.size()}, arch)});
  const auto in = model.input_extent();
  out.push_back({kInput, TensorF({2}, std::vector<float>{float(in.h), float(in.w)})});
  for (const auto& p : model.parameters()) out.push_back({p.name, p.value});
  for (const auto& s : model.running_stats()) {
    out.push_back({s.name + ".running_mean", s.stats.mean});
    out.push_back({s.name + ".running_var", s.stats.var});
  }
  return out;
}

void save_weights(const WeightsBundle& b, const std::string& path) {
  auto tensors = model_tensors(b.model);
  if (b.scalers) {
    const auto& s = *b.scalers;
    tensors.push_back({kScalerPrefix + "mean", vec_tensor(s.mean)});
    tensors.push_back({kScalerPrefix + "std", vec_tensor(s.std)});
    tensors.push_back({kScalerPrefix + "min", vec_tensor(s.min)});
    tensors.push_back({kScalerPrefix + "max", vec_tensor(s.max)});
    std::vector<double> deg(s.degenerate.begin(), s.degenerate.end());
    tensors.push_back({kScalerPrefix + "degenerate", vec_tensor(deg)});
    tensors.push_back({kFittedOnPrefix + s.fitted_on, TensorF({1})});
  }
  for (std::size_t i = 0; i < b.blocks.size(); ++i) {
    tensors.push_back({kBlockPrefix + b.blocks[i].name,
                       TensorF({2}, std::vector<float>{float(i), float(b.blocks[i].width)})});
  }
  for (const auto& t : b.extra) tensors.push_back(t);
  save_mlrw(path, tensors);
}

void save_weights(const CaeModelF& model, const std::string& path) {
  save_mlrw(path, model_tensors(model));
}

WeightsBundle bundle_from_tensors(const std::vector<NamedTensor>& tensors,
                                  const std::string& context) {
  const auto* arch_t = find_tensor(tensors, kArch);
  const auto* in_t = find_tensor(tensors, kInput);
  if (!arch_t || !in_t) throw TensorCountError(context + ": missing architecture metadata");
  if (in_t->tensor.size() != 2) throw FormatError(context + ": malformed input dims");
  const auto arch = decode_architecture({arch_t->tensor.values().begin(), arch_t->tensor.values().end()});
  const Extent2 input{static_cast<int>(in_t->tensor[0]), static_cast<int>(in_t->tensor[1])};

  WeightsBundle b{CaeModelF(arch, input, 0), std::nullopt, {}, {}};
  std::size_t expected = 2;
  auto take = [&](const std::string& name, TensorF& dst) {
    const auto* t = find_tensor(tensors, name);
    if (!t) throw TensorCountError(context + ": missing tensor '" + name + "'");
    if (t->tensor.dims() != dst.dims()) {
      throw FormatError(context + ": tensor '" + name + "' has dims " + shape_str(t->tensor.dims()) +
                        ", model expects " + shape_str(dst.dims()));
    }
    dst = t->tensor;
    ++expected;
  };
  for (auto& p : b.model.parameters()) take(p.name, p.value);
  for (auto& s : b.model.running_stats()) {
    take(s.name + ".running_mean", s.stats.mean);
    take(s.name + ".running_var", s.stats.var);
    s.stats.initialized = true;
  }
  std::size_t present = 0;
  for (const auto& t : tensors) present += is_model_tensor(t.name);
  if (present != expected) {
    throw TensorCountError(context + ": file holds " + std::to_string(present) +
                           " model tensors, architecture needs " + std::to_string(expected));
  }

  if (find_tensor(tensors, kScalerPrefix + "mean")) {
    data::NormalizationStats s;
    auto vec = [&](const std::string& key) {
      const auto* t = find_tensor(tensors, kScalerPrefix + key);
      if (!t) throw TensorCountError(context + ": missing scaler tensor '" + key + "'");
      return tensor_vec(t->tensor);
    };
    s.mean = vec("mean");
    s.std = vec("std");
    s.min = vec("min");
    s.max = vec("max");
    for (double d : vec("degenerate")) s.degenerate.push_back(d != 0);
    const std::size_t m = s.mean.size();
    if (s.std.size() != m || s.min.size() != m || s.max.size() != m || s.degenerate.size() != m) {
      throw FormatError(context + ": scaler tensors disagree in width");
    }
    if (m != std::size_t(input.w)) {
      throw FormatError(context + ": scaler width " + std::to_string(m) + " vs model width " +
                        std::to_string(input.w));
    }
    b.scalers = std::move(s);
  }
  std::vector<std::pair<int, data::Block>> blocks;
  for (const auto& t : tensors) {
    if (t.name.starts_with(kFittedOnPrefix) && b.scalers) {
      b.scalers->fitted_on = t.name.substr(kFittedOnPrefix.size());
    } else if (t.name.starts_with(kBlockPrefix)) {
      if (t.tensor.size() != 2) throw FormatError(context + ": malformed block tensor " + t.name);
      blocks.push_back({static_cast<int>(t.tensor[0]),
                        {t.name.substr(kBlockPrefix.size()), static_cast<std::size_t>(t.tensor[1])}});
    } else if (!is_model_tensor(t.name) && !t.name.starts_with(kScalerPrefix) &&
               !t.name.ends_with(".running_mean") && !t.name.ends_with(".running_var")) {
      b.extra.push_back(t);
    }
  }
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
  for (auto& [_, blk] : blocks) b.blocks.push_back(std::move(blk));
  return b;
}

WeightsBundle load_weights(const std::string& path) {
  return bundle_from_tensors(load_mlrw(path), path);
}

}  // namespace mlr::cae
