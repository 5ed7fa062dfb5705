#include "mlr/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mlr::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult finite_diff_check(const ScalarFn& fn, const TensorD& input, double eps,
                                  const std::optional<std::vector<std::size_t>>& indices) {
  if (!(eps > 0)) throw ConfigError("finite_diff_check eps must be positive");
  TensorD analytic(input.dims());
  fn(input, &analytic);
  require_same_dims(analytic.dims(), input.dims(), "finite_diff_check analytic gradient");

  std::vector<std::size_t> all;
  if (!indices) {
    all.resize(input.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  }
  const auto& which = indices ? *indices : all;

  GradCheckResult r;
  TensorD probe = input;
  for (auto i : which) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = fn(probe, nullptr);
    probe[i] = orig - eps;
    const double down = fn(probe, nullptr);
    probe[i] = orig;
    const double numeric = (up - down) / (2 * eps);
    const double err = relative_error(analytic[i], numeric);
    if (err > r.max_rel_error || (i == which.front() && err == 0)) {
      r.max_rel_error = std::max(r.max_rel_error, err);
      r.worst_index = i;
      r.analytic_at_worst = analytic[i];
      r.numeric_at_worst = numeric;
    }
  }
  return r;
}

bool smooth_along(const std::function<double()>& f, double& coord, double eps, double tol) {
  const double v0 = coord;
  auto central = [&](double e) {
    coord = v0 + e;
    const double up = f();
    coord = v0 - e;
    const double down = f();
    coord = v0;
    return (up - down) / (2 * e);
  };
  const double wide = central(eps);
  const double narrow = central(eps / 10);
  return relative_error(wide, narrow) <= tol;
}

}  // namespace mlr::nn
