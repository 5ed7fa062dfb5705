#pragma once

#include <cstdint>

#include "mlr/tensor.hpp"

namespace mlr::nn {

/// I.i.d. N(0, std^2) draws from a seeded mt19937_64. Draws are made in
/// double and cast, so float and double tensors from one seed agree.
template <typename T>
Tensor<T> normal_init(const Shape& dims, std::uint64_t seed, double std);

}  // namespace mlr::nn
