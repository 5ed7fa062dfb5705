#include "mlr/data/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlr::data {

NormalizationStats fit_scalers(std::span<const UtteranceRecord> train, std::string fitted_on) {
  if (train.empty()) throw ShapeError("fit_scalers needs a non-empty training split");
  const std::size_t m = train.front().x.dim(1);
  NormalizationStats s;
  s.fitted_on = std::move(fitted_on);
  s.mean.assign(m, 0.0);
  s.std.assign(m, 0.0);
  s.min.assign(m, std::numeric_limits<double>::infinity());
  s.max.assign(m, -std::numeric_limits<double>::infinity());
  s.degenerate.assign(m, false);

  std::size_t rows = 0;
  for (const auto& r : train) {
    if (r.x.rank() != 2 || r.x.dim(1) != m) {
      throw ShapeError("fit_scalers: record '" + r.id + "' has dims " + shape_str(r.x.dims()) +
                       ", expected width " + std::to_string(m));
    }
    const std::size_t n = r.x.dim(0);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t f = 0; f < m; ++f) s.mean[f] += r.x(t, f);
    rows += n;
  }
  for (auto& v : s.mean) v /= static_cast<double>(rows);

  for (const auto& r : train) {
    for (std::size_t t = 0; t < r.x.dim(0); ++t)
      for (std::size_t f = 0; f < m; ++f) {
        const double d = r.x(t, f) - s.mean[f];
        s.std[f] += d * d;
      }
  }
  for (std::size_t f = 0; f < m; ++f) {
    s.std[f] = std::sqrt(s.std[f] / static_cast<double>(rows));
    if (!(s.std[f] > 0)) {
      s.std[f] = 1.0;
      s.degenerate[f] = true;
    }
  }

  for (const auto& r : train) {
    for (std::size_t t = 0; t < r.x.dim(0); ++t)
      for (std::size_t f = 0; f < m; ++f) {
        const double z = (r.x(t, f) - s.mean[f]) / s.std[f];
        s.min[f] = std::min(s.min[f], z);
        s.max[f] = std::max(s.max[f], z);
      }
  }
  return s;
}

template <typename T>
Tensor<T> apply_scalers(const Tensor<T>& x, const NormalizationStats& stats) {
  if (x.rank() != 2 || x.dim(1) != stats.width()) {
    throw ShapeError("apply_scalers: input " + shape_str(x.dims()) + " vs scaler width " +
                     std::to_string(stats.width()));
  }
  const std::size_t n = x.dim(0), m = x.dim(1);
  Tensor<T> out(x.dims());
  for (std::size_t f = 0; f < m; ++f) {
    const double range = stats.max[f] - stats.min[f];
    const bool flat = stats.degenerate[f] || !(range > 0);
    for (std::size_t t = 0; t < n; ++t) {
      if (flat) {
        out(t, f) = T(0.5);
        continue;
      }
      const double z = (x(t, f) - stats.mean[f]) / stats.std[f];
      out(t, f) = static_cast<T>(std::clamp((z - stats.min[f]) / range, 0.0, 1.0));
    }
  }
  return out;
}

template Tensor<float> apply_scalers(const Tensor<float>&, const NormalizationStats&);
template Tensor<double> apply_scalers(const Tensor<double>&, const NormalizationStats&);

Dataset apply_scalers(const Dataset& d, const NormalizationStats& stats) {
  Dataset out = d;
  for (auto& r : out.records) r.x = apply_scalers(r.x, stats);
  return out;
}

}  // namespace mlr::data
