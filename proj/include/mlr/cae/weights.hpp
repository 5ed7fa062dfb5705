#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlr/cae/model.hpp"
#include "mlr/data/scaler.hpp"
#include "mlr/mlrw.hpp"

namespace mlr::cae {

/// Everything a weights file carries: the model, the scalers it was trained
/// behind, the block layout of its input columns and any extra tensors
/// (classifier heads).
struct WeightsBundle {
  CaeModelF model;
  std::optional<data::NormalizationStats> scalers;
  std::vector<data::Block> blocks;
  std::vector<NamedTensor> extra;
};

/// Tensors written for a model: "meta/architecture", "meta/input_dims", every
/// parameter by name and "<bn>.running_mean" / "<bn>.running_var".
std::vector<NamedTensor> model_tensors(const CaeModelF& model);

void save_weights(const WeightsBundle& bundle, const std::string& path);
void save_weights(const CaeModelF& model, const std::string& path);

/// Restores architecture, weights, running statistics and the shape chain.
/// Missing or extra model tensors raise TensorCountError; wrong dims raise
/// FormatError.
WeightsBundle load_weights(const std::string& path);
WeightsBundle bundle_from_tensors(const std::vector<NamedTensor>& tensors,
                                  const std::string& context);

}  // namespace mlr::cae
