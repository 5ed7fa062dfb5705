#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::downstream {

enum class Solver { newton, gradient };

/// L2-regularized logistic regression. `C` is the inverse regularization
/// strength: the solver minimizes
///   mean_i logloss(w.x_i + b, y_i) + ||w||^2 / (2 C B)
/// which has the same minimizer as 0.5 ||w||^2 + C * sum_i logloss. The
/// intercept is not penalized.
struct LogRegConfig {
  double C = 1.0;
  std::size_t max_iter = 1000;
  double tol = 1e-6;  // on the infinity norm of the objective gradient
  std::uint64_t seed = 0;  // recorded only; the solver is deterministic
  Solver solver = Solver::newton;
  void validate() const;
};

struct Convergence {
  bool converged = false;
  std::size_t iterations = 0;
  double grad_norm = 0;
  double objective = 0;
  std::vector<double> objective_history;  // one entry per accepted step, starting at w = 0
};

struct TaskModel {
  std::string name;
  std::vector<double> w;
  double b = 0;
  Convergence report;
};

struct LogRegModel {
  std::vector<TaskModel> tasks;
  LogRegConfig config;

  std::size_t dim() const { return tasks.empty() ? 0 : tasks.front().w.size(); }
  std::size_t parameter_count() const { return tasks.size() * (dim() + 1); }
  const TaskModel& task(const std::string& name) const;
};

/// Regularized objective at (w, b); exposed for tests and the gradient check.
double logreg_objective(const TensorD& x, const std::vector<int>& y, const std::vector<double>& w,
                        double b, double C, std::vector<double>* grad_w = nullptr,
                        double* grad_b = nullptr);

/// Fits one binary task. Labels must be 0/1 with both classes present,
/// otherwise TrainingError naming `task`.
TaskModel train_logreg(const TensorD& x, const std::vector<int>& y, const LogRegConfig& config,
                       const std::string& task = "task");

struct LabelColumn {
  std::string name;
  std::vector<int> y;
};

struct OneVsAllResult {
  LogRegModel model;
  std::vector<std::string> errors;  // one message per task that could not be trained
};

/// One independent binary model per column; a single-class column is reported
/// in `errors` and the remaining tasks are still trained.
OneVsAllResult train_one_vs_all(const TensorD& x, const std::vector<LabelColumn>& columns,
                                const LogRegConfig& config);

struct TaskPrediction {
  std::string name;
  std::vector<double> probability;
  std::vector<int> label;
};

/// sigmoid(w.x + b) per task; label = probability >= threshold.
std::vector<TaskPrediction> predict(const LogRegModel& model, const TensorD& x,
                                    double threshold = 0.5);

}  // namespace mlr::downstream
