#pragma once

#include <string>
#include <vector>

namespace mlr::downstream {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Empty or unequal-length inputs raise EvaluationError.
Confusion confusion_counts(const std::vector<int>& preds, const std::vector<int>& labels);
double binary_accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

/// Per-class F1 (classes 0 and 1) weighted by true-label support. A class with
/// no true and no predicted members scores 0.
double weighted_f1(const std::vector<int>& preds, const std::vector<int>& labels);

struct TaskMetrics {
  std::string name;
  double accuracy = 0;
  double weighted_f1 = 0;
  Confusion confusion;
};

struct MetricsReport {
  std::vector<TaskMetrics> tasks;
  std::size_t n_evaluated = 0;
};

}  // namespace mlr::downstream
