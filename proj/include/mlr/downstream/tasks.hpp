#pragma once

#include <string>
#include <vector>

#include "mlr/data/dataset.hpp"
#include "mlr/downstream/logreg.hpp"
#include "mlr/downstream/metrics.hpp"
#include "mlr/mlrw.hpp"

namespace mlr::downstream {

/// Signed scores become positive iff score > 0, or score >= 0 with
/// `zero_is_positive`. Binary fields are positive iff value > 0.5.
struct LabelRule {
  bool zero_is_positive = false;
  friend bool operator==(const LabelRule&, const LabelRule&) = default;
};

/// One 0/1 column per label field, in schema order.
std::vector<LabelColumn> label_columns(const data::Dataset& d, const LabelRule& rule = {});

/// Predicts with `model` and scores every task against the column of the same
/// name. Missing columns raise ConfigError.
MetricsReport evaluate(const LogRegModel& model, const TensorD& x,
                       const std::vector<LabelColumn>& columns, double threshold = 0.5);

/// "task/<name>/w" [K], "task/<name>/b" [1], plus "meta/label_rule/<rule>" and
/// "meta/logreg_C".
std::vector<NamedTensor> classifier_tensors(const LogRegModel& model, const LabelRule& rule);

struct LoadedClassifier {
  LogRegModel model;
  LabelRule rule;
};

/// Reads the tensors written by classifier_tensors out of a larger set; tasks
/// keep their stored order. No task tensors raise FormatError.
LoadedClassifier classifier_from_tensors(const std::vector<NamedTensor>& tensors);

}  // namespace mlr::downstream
