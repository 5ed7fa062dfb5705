#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::nn {

/// Scalar objective over a tensor. When `grad` is non-null the function also
/// writes its analytic gradient (same dims as the input) into it.
using ScalarFn = std::function<double(const TensorD& input, TensorD* grad)>;

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0;
  double numeric_at_worst = 0;
};

/// Central differences (f(x+eps) - f(x-eps)) / 2eps against the analytic
/// gradient; relative error uses the denominator max(|a|, |n|, 1e-8).
/// Checks every element, or only `indices` when given.
GradCheckResult finite_diff_check(const ScalarFn& fn, const TensorD& input, double eps,
                                  const std::optional<std::vector<std::size_t>>& indices = {});

/// Relative error as used by finite_diff_check.
double relative_error(double analytic, double numeric);

/// True when central differences of `f` along `coord` at `eps` and `eps / 10`
/// agree to `tol` (relative), i.e. no kink such as a max-pool argmax switch
/// lies inside the probe window. `coord` is restored before returning.
bool smooth_along(const std::function<double()>& f, double& coord, double eps, double tol = 1e-5);

}  // namespace mlr::nn
