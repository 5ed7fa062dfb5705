#pragma once

#include <cstddef>

namespace mlr::nn::detail {

// Fixed-order sum over 8 strided lanes: same bits regardless of where the buffer sits.
template <typename T, typename F>
double lane_sum(std::size_t n, F&& term) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t l = 0; l < 8; ++l) acc[l] += term(i + l);
  double s = 0;
  for (std::size_t l = 0; l < 8; ++l) s += static_cast<double>(acc[l]);
  for (; i < n; ++i) s += static_cast<double>(term(i));
  return s;
}

}  // namespace mlr::nn::detail
