#include "mlr/downstream/tasks.hpp"

namespace mlr::downstream {

namespace {

const std::string kTaskPrefix = "task/";
const std::string kRulePrefix = "meta/label_rule/";
const std::string kC = "meta/logreg_C";

std::string rule_name(const LabelRule& r) { return r.zero_is_positive ? "ge0" : "gt0"; }

}  // namespace

std::vector<LabelColumn> label_columns(const data::Dataset& d, const LabelRule& rule) {
  std::vector<LabelColumn> out;
  for (std::size_t j = 0; j < d.label_schema.size(); ++j) {
    LabelColumn c{d.label_schema[j].name, std::vector<int>(d.size())};
    const bool signed_score = d.label_schema[j].kind == data::LabelKind::signed_score;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const float v = d.records[i].labels.at(j);
      c.y[i] = signed_score ? (rule.zero_is_positive ? v >= 0 : v > 0) : v > 0.5f;
    }
    out.push_back(std::move(c));
  }
  return out;
}

MetricsReport evaluate(const LogRegModel& model, const TensorD& x,
                       const std::vector<LabelColumn>& columns, double threshold) {
  MetricsReport rep;
  rep.n_evaluated = x.rank() == 2 ? x.dim(0) : 0;
  for (const auto& p : predict(model, x, threshold)) {
    const LabelColumn* col = nullptr;
    for (const auto& c : columns)
      if (c.name == p.name) col = &c;
    if (!col) throw ConfigError("no label column for task '" + p.name + "'");
    rep.tasks.push_back({p.name, binary_accuracy(p.label, col->y), weighted_f1(p.label, col->y),
                         confusion_counts(p.label, col->y)});
  }
  return rep;
}

std::vector<NamedTensor> classifier_tensors(const LogRegModel& model, const LabelRule& rule) {
  std::vector<NamedTensor> out;
  for (const auto& t : model.tasks) {
    out.push_back({kTaskPrefix + t.name + "/w",
                   TensorF({t.w.size()}, std::vector<float>(t.w.begin(), t.w.end()))});
    out.push_back({kTaskPrefix + t.name + "/b", TensorF({1}, static_cast<float>(t.b))});
  }
  out.push_back({kRulePrefix + rule_name(rule), TensorF({1})});
  out.push_back({kC, TensorF({1}, static_cast<float>(model.config.C))});
  return out;
}

LoadedClassifier classifier_from_tensors(const std::vector<NamedTensor>& tensors) {
  LoadedClassifier out;
  for (const auto& nt : tensors) {
    if (nt.name == kC) {
      out.model.config.C = nt.tensor[0];
    } else if (nt.name.starts_with(kRulePrefix)) {
      const auto r = nt.name.substr(kRulePrefix.size());
      if (r != "gt0" && r != "ge0") throw FormatError("unknown label rule '" + r + "'");
      out.rule.zero_is_positive = r == "ge0";
    } else if (nt.name.starts_with(kTaskPrefix) && nt.name.ends_with("/w")) {
      const auto name = nt.name.substr(kTaskPrefix.size(), nt.name.size() - kTaskPrefix.size() - 2);
      const auto* b = find_tensor(tensors, kTaskPrefix + name + "/b");
      if (!b || b->tensor.size() != 1) throw FormatError("classifier task '" + name + "' has no bias");
      if (nt.tensor.rank() != 1) throw FormatError("classifier task '" + name + "' weights are not a vector");
      TaskModel t;
      t.name = name;
      t.w.assign(nt.tensor.values().begin(), nt.tensor.values().end());
      t.b = b->tensor[0];
      if (!out.model.tasks.empty() && t.w.size() != out.model.dim()) {
        throw FormatError("classifier tasks disagree in width");
      }
      out.model.tasks.push_back(std::move(t));
    }
  }
  if (out.model.tasks.empty()) throw FormatError("no classifier tasks present");
  return out;
}

}  // namespace mlr::downstream
