#pragma once

#include <string>
#include <vector>

#include "mlr/cae/weights.hpp"
#include "mlr/data/dataset.hpp"
#include "mlr/downstream/tasks.hpp"
#include "mlr/experiments/config.hpp"

namespace mlr::experiments {

/// `<dir>/<split>.mlrd`, capped at `limit` records when non-zero.
data::Dataset load_split(const DatasetRef& ref, const std::string& split, std::size_t limit = 0);

struct CaeRun {
  std::string weights_path;
  std::string history_path;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t code_size = 0;
  cae::TrainReport report;
};

/// Pools the train (and val) splits of every configured dataset, keeps the
/// configured modality blocks, fits scalers on train, trains the CAE and
/// writes `cae.mlrw`, `history.csv` and `run.json` under `out_dir`.
CaeRun cmd_train_cae(const RunConfig& config, const std::string& out_dir);

/// Scales and encodes `d` with the bundle's model. The result has one
/// timestep, a single "code" block of width K and the original labels.
/// Block or width disagreement raises FormatError ("dataset/model incompatible").
data::Dataset embed_dataset(const cae::WeightsBundle& bundle, const data::Dataset& d);

/// File form of embed_dataset: reads an MLRD manifest, writes another.
data::Dataset cmd_embed(const std::string& weights_path, const std::string& dataset_manifest,
                        const std::string& out_manifest, std::size_t limit = 0);

struct ClfResult {
  downstream::LogRegModel model;
  downstream::MetricsReport report;
  std::vector<std::string> errors;  // tasks that could not be trained
};

/// One logistic-regression task per label field of the training embeddings,
/// scored on the test embeddings.
ClfResult train_eval_clf(const data::Dataset& train_emb, const data::Dataset& test_emb,
                         const RunConfig& config);

/// File form: writes `report.csv` and `classifier.mlrw` under `out_dir`.
ClfResult cmd_train_eval_clf(const std::string& train_manifest, const std::string& test_manifest,
                             const RunConfig& config, const std::string& out_dir);

/// Scores a saved classifier on an embedding set; writes `report.csv`.
downstream::MetricsReport cmd_eval(const std::string& classifier_path,
                                   const std::string& emb_manifest, const std::string& out_dir,
                                   double threshold = 0.5);

struct AblationRow {
  std::string kind;  // "modalities" or "datasets"
  std::string combination;
  double val_mse = 0;
  std::vector<downstream::TaskMetrics> tasks;
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

/// For every requested modality subset and dataset combination: train-cae,
/// embed the eval dataset's train and test splits, train-clf. Each row runs in
/// its own subdirectory; `ablation.csv` collects the table.
AblationReport cmd_ablate(const RunConfig& config, const std::string& out_dir);

struct ParamRow {
  std::string name;
  std::size_t count = 0;
};

struct ParamReport {
  std::vector<ParamRow> rows;  // per layer, then totals
  std::size_t encoder_total = 0;
  std::size_t decoder_total = 0;
  std::size_t code_size = 0;
  std::size_t with_one_task = 0;
  std::size_t with_four_tasks = 0;
  std::vector<std::string> notes;
};

ParamReport count_params(const cae::CaeArchitecture& arch, nn::Extent2 input);
/// From a weights file.
ParamReport cmd_count_params(const std::string& weights_path);
/// From a config: architecture plus the widths of the selected modalities
/// (dataset manifests when configured, otherwise the synth blocks).
ParamReport cmd_count_params(const RunConfig& config);

/// Generates the configured synthetic dataset into `<out_dir>/{train,val,test}.mlrd`.
data::SynthSplits cmd_synth(const RunConfig& config, const std::string& out_dir);

std::string history_csv(const cae::TrainReport& r);
std::string metrics_csv(const downstream::MetricsReport& r);
std::string ablation_csv(const AblationReport& r);
std::string params_csv(const ParamReport& r);

/// Output directory: explicit flag, then config, then $MLR_OUT_ROOT/<verb>,
/// then runs/<verb>.
std::string resolve_out_dir(const std::string& flag, const std::string& config_out,
                            const std::string& verb);

}  // namespace mlr::experiments
