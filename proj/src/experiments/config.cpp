#include "mlr/experiments/config.hpp"

#include <set>

#include <json.hpp>

#include "mlr/binary_io.hpp"

namespace mlr::experiments {

namespace {

using nlohmann::json;

// Rejects keys outside `allowed`, naming the section.
void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void parse_train(const json& j, cae::TrainConfig& t) {
  const std::string w = "train";
  only_keys(j, w, {"batch_size", "max_epochs", "early_stop_patience", "lr", "init_std", "scheduler", "adam"});
  take(j, "batch_size", t.batch_size, w);
  take(j, "max_epochs", t.max_epochs, w);
  take(j, "early_stop_patience", t.early_stop_patience, w);
  take(j, "lr", t.lr, w);
  take(j, "init_std", t.init_std, w);
  if (j.contains("scheduler")) {
    const auto& s = j["scheduler"];
    only_keys(s, "train.scheduler", {"factor", "patience", "threshold", "min_lr"});
    take(s, "factor", t.scheduler.factor, "train.scheduler");
    take(s, "patience", t.scheduler.patience, "train.scheduler");
    take(s, "threshold", t.scheduler.threshold, "train.scheduler");
    take(s, "min_lr", t.scheduler.min_lr, "train.scheduler");
  }
  if (j.contains("adam")) {
    const auto& a = j["adam"];
    only_keys(a, "train.adam", {"beta1", "beta2", "epsilon"});
    take(a, "beta1", t.adam.beta1, "train.adam");
    take(a, "beta2", t.adam.beta2, "train.adam");
    take(a, "epsilon", t.adam.epsilon, "train.adam");
  }
}

void parse_logreg(const json& j, downstream::LogRegConfig& l) {
  only_keys(j, "logreg", {"C", "max_iter", "tol", "solver"});
  take(j, "C", l.C, "logreg");
  take(j, "max_iter", l.max_iter, "logreg");
  take(j, "tol", l.tol, "logreg");
  if (j.contains("solver")) {
    std::string s;
    take(j, "solver", s, "logreg");
    if (s == "newton") l.solver = downstream::Solver::newton;
    else if (s == "gradient") l.solver = downstream::Solver::gradient;
    else throw ConfigError("logreg.solver must be 'newton' or 'gradient'");
  }
}

void parse_synth(const json& j, data::SynthConfig& s) {
  const std::string w = "synth";
  only_keys(j, w, {"name", "n_utterances", "class_count", "noise_std", "blocks", "signal_blocks",
                   "latent_dim", "seed", "feature_seed"});
  take(j, "name", s.name, w);
  take(j, "n_utterances", s.n_utterances, w);
  take(j, "class_count", s.class_count, w);
  take(j, "noise_std", s.noise_std, w);
  take(j, "signal_blocks", s.signal_blocks, w);
  take(j, "latent_dim", s.latent_dim, w);
  take(j, "seed", s.seed, w);
  take(j, "feature_seed", s.feature_seed, w);
  if (j.contains("blocks")) {
    s.blocks.clear();
    for (const auto& b : j["blocks"]) {
      only_keys(b, "synth.blocks[]", {"name", "width"});
      data::Block blk;
      take(b, "name", blk.name, "synth.blocks[]");
      take(b, "width", blk.width, "synth.blocks[]");
      s.blocks.push_back(blk);
    }
  }
}

const std::set<std::string> kModalities{"audio", "vision", "text"};

}  // namespace

cae::CaeArchitecture architecture_named(const std::string& name) {
  if (name == "reference") return cae::CaeArchitecture::reference();
  if (name == "full_batchnorm") return cae::CaeArchitecture::full_batchnorm();
  throw ConfigError("unknown architecture '" + name + "' (reference | full_batchnorm)");
}

void RunConfig::finalize() {
  train.seed = seed;
  train.precision = precision;
  train.validate();
  logreg.seed = seed;
  logreg.validate();
  architecture_named(architecture);
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (d.name.empty() || d.dir.empty()) throw ConfigError("datasets[] entries need a name and a dir");
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
  }
  for (const auto& m : modalities) {
    if (!kModalities.count(m)) throw ConfigError("illegal modality '" + m + "' (audio | vision | text)");
  }
  for (const auto& subset : ablation.modality_subsets) {
    if (subset.empty()) throw ConfigError("empty modality subset in ablation");
    for (const auto& m : subset)
      if (!kModalities.count(m)) throw ConfigError("illegal modality '" + m + "' in ablation");
  }
  for (const auto& combo : ablation.dataset_combinations) {
    if (combo.empty()) throw ConfigError("empty dataset combination in ablation");
    for (const auto& n : combo)
      if (!names.count(n)) throw ConfigError("ablation names unknown dataset '" + n + "'");
  }
  if (!ablation.eval_dataset.empty() && !names.count(ablation.eval_dataset)) {
    throw ConfigError("ablation.eval_dataset '" + ablation.eval_dataset + "' is not configured");
  }
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"datasets", "modalities", "architecture", "train", "logreg", "labels",
                          "ablation", "synth", "seed", "limit", "precision", "out"});
  RunConfig c;
  if (j.contains("datasets")) {
    if (!j["datasets"].is_array()) throw ConfigError("datasets must be an array");
    for (const auto& d : j["datasets"]) {
      only_keys(d, "datasets[]", {"name", "dir"});
      DatasetRef r;
      take(d, "name", r.name, "datasets[]");
      take(d, "dir", r.dir, "datasets[]");
      c.datasets.push_back(r);
    }
  }
  take(j, "modalities", c.modalities, "config");
  take(j, "architecture", c.architecture, "config");
  if (j.contains("train")) parse_train(j["train"], c.train);
  if (j.contains("logreg")) parse_logreg(j["logreg"], c.logreg);
  if (j.contains("labels")) {
    only_keys(j["labels"], "labels", {"zero_is_positive", "shuffle"});
    take(j["labels"], "zero_is_positive", c.label_rule.zero_is_positive, "labels");
    take(j["labels"], "shuffle", c.shuffle_labels, "labels");
  }
  if (j.contains("ablation")) {
    const auto& a = j["ablation"];
    only_keys(a, "ablation", {"modality_subsets", "dataset_combinations", "eval_dataset"});
    take(a, "modality_subsets", c.ablation.modality_subsets, "ablation");
    take(a, "dataset_combinations", c.ablation.dataset_combinations, "ablation");
    take(a, "eval_dataset", c.ablation.eval_dataset, "ablation");
  }
  if (j.contains("synth")) parse_synth(j["synth"], c.synth);
  take(j, "seed", c.seed, "config");
  take(j, "limit", c.limit, "config");
  take(j, "precision", c.precision, "config");
  take(j, "out", c.out, "config");
  c.finalize();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()));
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["datasets"] = json::array();
  for (const auto& d : c.datasets) j["datasets"].push_back({{"name", d.name}, {"dir", d.dir}});
  j["modalities"] = c.modalities;
  j["architecture"] = c.architecture;
  const auto& t = c.train;
  j["train"] = {{"batch_size", t.batch_size},
                {"max_epochs", t.max_epochs},
                {"early_stop_patience", t.early_stop_patience},
                {"lr", t.lr},
                {"init_std", t.init_std},
                {"scheduler", {{"factor", t.scheduler.factor}, {"patience", t.scheduler.patience},
                               {"threshold", t.scheduler.threshold}, {"min_lr", t.scheduler.min_lr}}},
                {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}}};
  j["logreg"] = {{"C", c.logreg.C},
                 {"max_iter", c.logreg.max_iter},
                 {"tol", c.logreg.tol},
                 {"solver", c.logreg.solver == downstream::Solver::newton ? "newton" : "gradient"}};
  j["labels"] = {{"zero_is_positive", c.label_rule.zero_is_positive}, {"shuffle", c.shuffle_labels}};
  j["ablation"] = {{"modality_subsets", c.ablation.modality_subsets},
                   {"dataset_combinations", c.ablation.dataset_combinations},
                   {"eval_dataset", c.ablation.eval_dataset}};
  json blocks = json::array();
  for (const auto& b : c.synth.blocks) blocks.push_back({{"name", b.name}, {"width", b.width}});
  j["synth"] = {{"name", c.synth.name},          {"n_utterances", c.synth.n_utterances},
                {"class_count", c.synth.class_count}, {"noise_std", c.synth.noise_std},
                {"blocks", blocks},              {"signal_blocks", c.synth.signal_blocks},
                {"latent_dim", c.synth.latent_dim},   {"seed", c.synth.seed},
                {"feature_seed", c.synth.feature_seed}};
  j["seed"] = c.seed;
  j["limit"] = c.limit;
  j["precision"] = c.precision;
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

}  // namespace mlr::experiments
