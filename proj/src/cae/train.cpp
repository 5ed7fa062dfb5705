#include "mlr/cae/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "mlr/nn/loss.hpp"

namespace mlr::cae {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be positive");
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (!(init_std > 0)) throw ConfigError("init_std must be positive");
  if (precision != 32 && precision != 64) throw ConfigError("precision must be 32 or 64");
}

namespace {

template <typename T>
Tensor<T> gather(const Tensor<T>& data, std::span<const std::size_t> rows) {
  Shape dims = data.dims();
  const std::size_t per = data.size() / dims[0];
  dims[0] = rows.size();
  Tensor<T> out(dims);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::memcpy(out.data() + i * per, data.data() + rows[i] * per, per * sizeof(T));
  }
  return out;
}

}  // namespace

template <typename T>
double reconstruction_mse(const CaeModel<T>& model, const Tensor<T>& data, std::size_t chunk) {
  const std::size_t n = data.dim(0);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  double total = 0;
  for (std::size_t at = 0; at < n; at += chunk) {
    const auto idx = std::span<const std::size_t>(rows).subspan(at, std::min(chunk, n - at));
    const auto x = gather(data, idx);
    const auto recon = model.decode(model.encode(x));
    total += nn::mse_loss(recon.reshaped(x.dims()), x).loss * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(n);
}

template <typename T>
TrainReport train_cae(CaeModel<T>& model, const Tensor<T>& train, const Tensor<T>& val,
                      const TrainConfig& config,
                      const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train.rank() != 4 || val.rank() != 4) {
    throw ShapeError("train_cae expects [B,1,N,M] train and val sets");
  }
  auto check_range = [](const Tensor<T>& t, const char* what) {
    for (auto v : t.values()) {
      if (!(v >= T(0) && v <= T(1))) {
        throw ConfigError(std::string(what) + " set holds values outside [0,1]; normalize first");
      }
    }
  };
  check_range(train, "train");
  check_range(val, "val");

  std::vector<nn::AdamState<T>> adam(model.parameters().size());
  nn::SchedulerState sched(config.lr, config.scheduler);
  std::mt19937_64 rng(config.seed);

  TrainReport report;
  report.initial_val_mse = reconstruction_mse(model, val);
  report.best_val_mse = report.initial_val_mse;
  auto best_params = model.parameters();
  auto best_stats = model.running_stats();
  std::size_t since_best = 0;

  const std::size_t n = train.dim(0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t at = 0; at < n; at += config.batch_size, ++batch_index) {
      const auto idx =
          std::span<const std::size_t>(order).subspan(at, std::min(config.batch_size, n - at));
      const auto x = gather(train, idx);
      const auto recon = model.forward(x, Mode::train);
      auto loss = nn::mse_loss(recon, x);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite reconstruction loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index));
      }
      model.backward(loss.grad);
      auto& params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        try {
          nn::adam_step(params[p].value, params[p].grad, adam[p], sched.current_lr, config.adam,
                        params[p].name);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index) + ": " + e.what());
        }
      }
      loss_sum += loss.loss * static_cast<double>(idx.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = loss_sum / static_cast<double>(n);
    rec.val_mse = reconstruction_mse(model, val);
    rec.lr = sched.current_lr;
    if (!std::isfinite(rec.val_mse)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    report.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_mse < report.best_val_mse) {
      report.best_val_mse = rec.val_mse;
      report.best_epoch = epoch;
      best_params = model.parameters();
      best_stats = model.running_stats();
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      report.early_stopped = true;
      break;
    }
    nn::scheduler_update(sched, rec.val_mse);
  }

  auto& params = model.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) params[p].value = std::move(best_params[p].value);
  model.running_stats() = std::move(best_stats);
  return report;
}

template double reconstruction_mse(const CaeModel<float>&, const Tensor<float>&, std::size_t);
template double reconstruction_mse(const CaeModel<double>&, const Tensor<double>&, std::size_t);
template TrainReport train_cae(CaeModel<float>&, const Tensor<float>&, const Tensor<float>&,
                               const TrainConfig&, const std::function<void(const EpochRecord&)>&);
template TrainReport train_cae(CaeModel<double>&, const Tensor<double>&, const Tensor<double>&,
                               const TrainConfig&, const std::function<void(const EpochRecord&)>&);

}  // namespace mlr::cae
