#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mlr/cae/model.hpp"
#include "mlr/nn/optim.hpp"

namespace mlr::cae {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t early_stop_patience = 10;
  double lr = 0.002;
  nn::SchedulerConfig scheduler;
  nn::AdamConfig adam;
  double init_std = kDefaultInitStd;
  std::uint64_t seed = 1;
  int precision = 32;  // 32 or 64

  /// Throws ConfigError on non-positive sizes or rates.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0;
  double val_mse = 0;
  double lr = 0;
};

struct TrainReport {
  std::vector<EpochRecord> history;
  double initial_val_mse = 0;  // eval-mode val MSE before the first update
  std::size_t best_epoch = 0;  // 0 when the initial weights were never beaten
  double best_val_mse = 0;
  bool early_stopped = false;
};

/// Mean eval-mode reconstruction MSE over a [B,1,N,M] set, in chunks.
template <typename T>
double reconstruction_mse(const CaeModel<T>& model, const Tensor<T>& data,
                          std::size_t chunk = 64);

/// Adam on reconstruction MSE with the reduce-on-plateau schedule stepped on
/// every epoch's val MSE. Stops after `early_stop_patience` epochs without a
/// val improvement and leaves `model` holding the best-val weights (the
/// initial weights count as epoch 0). Batches are reshuffled every epoch from
/// `config.seed`. A non-finite loss throws NumericError naming epoch and batch.
template <typename T>
TrainReport train_cae(CaeModel<T>& model, const Tensor<T>& train, const Tensor<T>& val,
                      const TrainConfig& config,
                      const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace mlr::cae
