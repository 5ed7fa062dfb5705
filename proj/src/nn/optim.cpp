#include "mlr/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlr::nn {

template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state, double lr,
               const AdamConfig& config, const std::string& name) {
  require_same_dims(param.dims(), grad.dims(), ("adam_step " + name + " grad").c_str());
  if (state.m.empty()) state = AdamState<T>(param.dims());
  require_same_dims(param.dims(), state.m.dims(), ("adam_step " + name + " moments").c_str());
  require_finite(grad, "gradient of parameter '" + name + "'");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
  const T step_size = static_cast<T>(lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(config.epsilon);
  T* p = param.data();
  T* m = state.m.data();
  T* v = state.v.data();
  const T* g = grad.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    p[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_bc2 + eps);
  }
}

template void adam_step(Tensor<float>&, const Tensor<float>&, AdamState<float>&, double,
                        const AdamConfig&, const std::string&);
template void adam_step(Tensor<double>&, const Tensor<double>&, AdamState<double>&, double,
                        const AdamConfig&, const std::string&);

SchedulerState::SchedulerState(double initial_lr, SchedulerConfig cfg)
    : config(cfg),
      best_val_loss(std::numeric_limits<double>::infinity()),
      current_lr(std::max(initial_lr, cfg.min_lr)) {
  if (!(cfg.min_lr > 0) || !(cfg.factor > 0 && cfg.factor < 1) || cfg.patience < 0) {
    throw ConfigError("scheduler needs min_lr > 0, factor in (0,1), patience >= 0");
  }
}

bool scheduler_update(SchedulerState& state, double val_loss) {
  if (!std::isfinite(val_loss)) {
    throw NumericError("scheduler_update received non-finite validation loss");
  }
  if (val_loss < state.best_val_loss * (1.0 - state.config.threshold)) {
    state.best_val_loss = val_loss;
    state.epochs_since_improvement = 0;
    return false;
  }
  state.epochs_since_improvement += 1;
  if (state.epochs_since_improvement > state.config.patience) {
    state.epochs_since_improvement = 0;
    const double next = std::max(state.current_lr * state.config.factor, state.config.min_lr);
    const bool reduced = next < state.current_lr;
    state.current_lr = next;
    return reduced;
  }
  return false;
}

}  // namespace mlr::nn
