#include "mlr/downstream/metrics.hpp"

#include "mlr/error.hpp"

namespace mlr::downstream {

Confusion confusion_counts(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.empty()) throw EvaluationError("metrics over an empty prediction set");
  if (preds.size() != labels.size()) {
    throw EvaluationError(std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(labels.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0, t = labels[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double binary_accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  const auto c = confusion_counts(preds, labels);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

double weighted_f1(const std::vector<int>& preds, const std::vector<int>& labels) {
  const auto c = confusion_counts(preds, labels);
  const double n = static_cast<double>(c.total());
  const double pos = static_cast<double>(c.tp + c.fn), neg = static_cast<double>(c.tn + c.fp);
  // class 0 swaps the roles of tp/tn and fp/fn
  return (pos * f1(c.tp, c.fp, c.fn) + neg * f1(c.tn, c.fn, c.fp)) / n;
}

}  // namespace mlr::downstream
