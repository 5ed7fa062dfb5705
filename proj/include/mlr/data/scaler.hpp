#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlr/data/dataset.hpp"

namespace mlr::data {

/// Per-feature standard scaling followed by min-max scaling of the
/// standardized values, fitted over every (utterance, timestep) row.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;  // population std; 1 for degenerate features
  std::vector<double> min;  // of standardized values over the fit set
  std::vector<double> max;
  std::vector<bool> degenerate;
  std::string fitted_on;

  std::size_t width() const { return mean.size(); }
};

NormalizationStats fit_scalers(std::span<const UtteranceRecord> train, std::string fitted_on);

/// z = (x - mean) / std, then (z - min) / (max - min) clipped to [0, 1].
/// Degenerate or zero-range features map to 0.5.
template <typename T>
Tensor<T> apply_scalers(const Tensor<T>& x, const NormalizationStats& stats);

/// Applies the scalers to every record of a dataset.
Dataset apply_scalers(const Dataset& d, const NormalizationStats& stats);

}  // namespace mlr::data
