#pragma once

#include <string>

#include "mlr/tensor.hpp"

namespace mlr::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments for one parameter tensor.
template <typename T>
struct AdamState {
  Tensor<T> m;
  Tensor<T> v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(const Shape& dims) : m(dims), v(dims) {}
};

/// One bias-corrected Adam update of `param` in place. Throws NumericError
/// naming `name` if `grad` holds a non-finite value; `param` is then untouched.
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state, double lr,
               const AdamConfig& config, const std::string& name);

struct SchedulerConfig {
  double factor = 0.5;
  int patience = 5;
  double threshold = 1e-4;  // relative improvement needed to reset the counter
  double min_lr = 1e-5;
};

/// Reduce-on-plateau state (minimizing).
struct SchedulerState {
  SchedulerConfig config;
  double best_val_loss;
  int epochs_since_improvement = 0;
  double current_lr;

  explicit SchedulerState(double initial_lr, SchedulerConfig cfg = {});
};

/// Feeds one validation loss. A loss counts as an improvement when it is below
/// best * (1 - threshold). Once the counter exceeds `patience`, the rate is
/// multiplied by `factor` (clamped at min_lr) and the counter resets.
/// Returns true if the rate was reduced.
bool scheduler_update(SchedulerState& state, double val_loss);

}  // namespace mlr::nn
