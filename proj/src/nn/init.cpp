#include "mlr/nn/init.hpp"

#include <random>

namespace mlr::nn {

template <typename T>
Tensor<T> normal_init(const Shape& dims, std::uint64_t seed, double std) {
  Tensor<T> t(dims);
  if (std == 0.0) return t;
  if (!(std > 0.0)) throw ConfigError("normal_init std must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

template Tensor<float> normal_init(const Shape&, std::uint64_t, double);
template Tensor<double> normal_init(const Shape&, std::uint64_t, double);

}  // namespace mlr::nn
