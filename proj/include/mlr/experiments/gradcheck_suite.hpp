#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlr::experiments {

struct GradCheckOptions {
  std::size_t seeds = 20;
  double tolerance = 1e-4;
  std::uint64_t base_seed = 0;
  std::vector<std::string> only;  // empty: every op
  std::string inject_fault;       // op whose analytic gradient gets scaled by 1.01
};

struct GradCheckRow {
  std::string op;
  std::size_t trials = 0;
  double max_rel_error = 0;
  std::uint64_t worst_seed = 0;
  bool pass = false;
};

/// conv2d, maxpool, batchnorm, gelu, sigmoid, upsample, mse, cae_end_to_end, logistic.
const std::vector<std::string>& gradcheck_ops();

/// Central finite differences at 64-bit precision against every backward pass,
/// one random small problem per seed. Unknown names in `only` raise ConfigError.
std::vector<GradCheckRow> run_gradcheck_suite(const GradCheckOptions& options);

}  // namespace mlr::experiments
