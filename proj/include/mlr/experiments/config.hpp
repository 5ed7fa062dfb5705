#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlr/cae/train.hpp"
#include "mlr/data/synth.hpp"
#include "mlr/downstream/logreg.hpp"
#include "mlr/downstream/tasks.hpp"

namespace mlr::experiments {

/// A dataset on disk: `dir` holds train.mlrd, val.mlrd and test.mlrd.
struct DatasetRef {
  std::string name;
  std::string dir;
};

struct AblationConfig {
  std::vector<std::vector<std::string>> modality_subsets;
  std::vector<std::vector<std::string>> dataset_combinations;
  std::string eval_dataset;  // downstream target; defaults to the first dataset
};

/// Everything one run needs. Parsed from JSON; unknown keys anywhere are a
/// ConfigError. See docs/config.md for the schema.
struct RunConfig {
  std::vector<DatasetRef> datasets;
  std::vector<std::string> modalities;  // empty: every block, in dataset order
  std::string architecture = "reference";  // or "full_batchnorm"
  cae::TrainConfig train;
  downstream::LogRegConfig logreg;
  downstream::LabelRule label_rule;
  bool shuffle_labels = false;  // permutation control for train-clf
  AblationConfig ablation;
  data::SynthConfig synth;
  std::uint64_t seed = 1;
  std::size_t limit = 0;  // 0: no cap on utterances per split
  int precision = 32;
  std::string out;

  /// Seeds the CAE trainer from `seed`, checks ranges.
  void finalize();
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& c);

cae::CaeArchitecture architecture_named(const std::string& name);

}  // namespace mlr::experiments
