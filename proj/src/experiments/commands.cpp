#include "mlr/experiments/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "mlr/binary_io.hpp"
#include "mlr/data/mlrd.hpp"
#include "mlr/data/scaler.hpp"

namespace mlr::experiments {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::vector<std::string> selected_blocks(const RunConfig& c, const data::Dataset& d) {
  if (!c.modalities.empty()) return c.modalities;
  std::vector<std::string> names;
  for (const auto& b : d.blocks) names.push_back(b.name);
  return names;
}

data::Dataset pooled(const RunConfig& c, const std::string& split) {
  if (c.datasets.empty()) throw ConfigError("no datasets configured");
  std::vector<data::Dataset> parts;
  for (const auto& ref : c.datasets) parts.push_back(load_split(ref, split, c.limit));
  std::vector<const data::Dataset*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  std::vector<std::string> names;
  for (const auto& ref : c.datasets) names.push_back(ref.name);
  auto all = data::concat_datasets(ptrs, join(names, "+"));
  return data::select_blocks(all, selected_blocks(c, all));
}

// Scalers as stored in a weights file, so training and later embedding see the same values.
data::NormalizationStats round_to_float(data::NormalizationStats s) {
  for (auto* v : {&s.mean, &s.std, &s.min, &s.max})
    for (auto& x : *v) x = static_cast<float>(x);
  return s;
}

template <typename T>
Tensor<T> stacked(const data::Dataset& d) {
  if constexpr (std::is_same_v<T, float>) {
    return data::stack_inputs(d.records);
  } else {
    return data::stack_inputs(d.records).template cast<T>();
  }
}

std::string run_metadata(const RunConfig& c, const CaeRun& r, const data::NormalizationStats& s) {
  std::ostringstream o;
  o << "{\n  \"precision\": " << c.precision << ",\n  \"seed\": " << c.seed
    << ",\n  \"scalers_fitted_on\": \"" << s.fitted_on << "\",\n  \"train_size\": " << r.train_size
    << ",\n  \"val_size\": " << r.val_size << ",\n  \"code_size\": " << r.code_size
    << ",\n  \"best_epoch\": " << r.report.best_epoch << ",\n  \"best_val_mse\": " << fmt(r.report.best_val_mse)
    << ",\n  \"early_stopped\": " << (r.report.early_stopped ? "true" : "false")
    << ",\n  \"shuffle\": \"uniform over the pooled train splits, reseeded per epoch from seed\"\n}\n";
  return o.str();
}

}  // namespace

data::Dataset load_split(const DatasetRef& ref, const std::string& split, std::size_t limit) {
  const auto path = (fs::path(ref.dir) / (split + ".mlrd")).string();
  if (!fs::exists(path)) throw IoError("dataset '" + ref.name + "' has no " + split + " split at " + path);
  auto d = data::load_dataset(path);
  if (limit && d.records.size() > limit) d.records.resize(limit);
  return d;
}

CaeRun cmd_train_cae(const RunConfig& config, const std::string& out_dir) {
  auto train = pooled(config, "train");
  auto val = pooled(config, "val");
  if (train.size() == 0 || val.size() == 0) throw FormatError("train-cae needs non-empty train and val splits");
  make_dir(out_dir);

  const auto stats = round_to_float(data::fit_scalers(train.records, train.name + "/train"));
  train = data::apply_scalers(train, stats);
  val = data::apply_scalers(val, stats);
  const auto arch = architecture_named(config.architecture);
  const nn::Extent2 input{static_cast<int>(train.timesteps), static_cast<int>(train.width())};

  CaeRun run;
  run.train_size = train.size();
  run.val_size = val.size();
  cae::CaeModelF model(arch, input, config.seed, config.train.init_std);
  if (config.precision == 64) {
    auto m64 = model.cast<double>();
    run.report = cae::train_cae(m64, stacked<double>(train), stacked<double>(val), config.train);
    model = m64.cast<float>();
  } else {
    run.report = cae::train_cae(model, stacked<float>(train), stacked<float>(val), config.train);
  }
  run.code_size = model.code_size();

  run.weights_path = (fs::path(out_dir) / "cae.mlrw").string();
  run.history_path = (fs::path(out_dir) / "history.csv").string();
  cae::save_weights(cae::WeightsBundle{model, stats, train.blocks, {}}, run.weights_path);
  write_text(run.history_path, history_csv(run.report));
  write_text((fs::path(out_dir) / "run.json").string(), run_metadata(config, run, stats));
  write_text((fs::path(out_dir) / "config.json").string(), run_config_to_json(config));
  return run;
}

data::Dataset embed_dataset(const cae::WeightsBundle& bundle, const data::Dataset& d) {
  const auto& model = bundle.model;
  const auto in = model.input_extent();
  data::Dataset x = d;
  if (!bundle.blocks.empty()) {
    std::vector<std::string> names;
    for (const auto& b : bundle.blocks) {
      const auto it = std::find_if(d.blocks.begin(), d.blocks.end(),
                                   [&](const data::Block& db) { return db.name == b.name; });
      if (it == d.blocks.end() || it->width != b.width) {
        throw FormatError("dataset/model incompatible: model expects block '" + b.name + "' of width " +
                          std::to_string(b.width) + ", dataset '" + d.name + "' " +
                          (it == d.blocks.end() ? "has no such block" : "has width " + std::to_string(it->width)));
      }
      names.push_back(b.name);
    }
    x = data::select_blocks(d, names);
  }
  if (x.width() != std::size_t(in.w) || x.timesteps != std::size_t(in.h)) {
    throw FormatError("dataset/model incompatible: model input " + std::to_string(in.h) + "x" +
                      std::to_string(in.w) + ", dataset " + std::to_string(x.timesteps) + "x" +
                      std::to_string(x.width()));
  }
  if (bundle.scalers) x = data::apply_scalers(x, *bundle.scalers);

  data::Dataset out;
  out.name = d.name;
  out.split = d.split;
  out.timesteps = 1;
  out.blocks = {{"code", model.code_size()}};
  out.label_schema = d.label_schema;
  constexpr std::size_t kChunk = 64;
  for (std::size_t at = 0; at < x.size(); at += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - at);
    std::vector<data::UtteranceRecord> part(x.records.begin() + at, x.records.begin() + at + n);
    const auto codes = model.encode(data::stack_inputs(part));
    for (std::size_t i = 0; i < n; ++i) {
      data::UtteranceRecord r;
      r.x = TensorF({1, model.code_size()});
      std::copy(codes.data() + i * model.code_size(), codes.data() + (i + 1) * model.code_size(), r.x.data());
      r.labels = part[i].labels;
      r.id = part[i].id;
      r.source_dataset = part[i].source_dataset;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

data::Dataset cmd_embed(const std::string& weights_path, const std::string& dataset_manifest,
                        const std::string& out_manifest, std::size_t limit) {
  const auto bundle = cae::load_weights(weights_path);
  auto d = data::load_dataset(dataset_manifest);
  if (limit && d.records.size() > limit) d.records.resize(limit);
  auto emb = embed_dataset(bundle, d);
  const auto parent = fs::path(out_manifest).parent_path();
  if (!parent.empty()) make_dir(parent.string());
  data::save_dataset(emb, out_manifest);
  return emb;
}

namespace {

TensorD embedding_matrix(const data::Dataset& d) {
  if (d.timesteps != 1 || d.size() == 0) {
    throw FormatError("'" + d.name + "/" + d.split + "' is not a non-empty embedding set (timesteps " +
                      std::to_string(d.timesteps) + ")");
  }
  TensorD x({d.size(), d.width()});
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t k = 0; k < d.width(); ++k) x(i, k) = d.records[i].x(0, k);
  return x;
}

}  // namespace

ClfResult train_eval_clf(const data::Dataset& train_emb, const data::Dataset& test_emb,
                         const RunConfig& config) {
  if (train_emb.width() != test_emb.width()) {
    throw FormatError("embedding widths differ: train K=" + std::to_string(train_emb.width()) +
                      ", test K=" + std::to_string(test_emb.width()));
  }
  if (train_emb.label_schema != test_emb.label_schema) {
    throw FormatError("train and test embeddings carry different label schemas");
  }
  const auto x_train = embedding_matrix(train_emb), x_test = embedding_matrix(test_emb);
  auto cols = downstream::label_columns(train_emb, config.label_rule);
  if (config.shuffle_labels) {
    std::vector<std::size_t> perm(train_emb.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(config.seed));
    for (auto& c : cols) {
      auto y = c.y;
      for (std::size_t i = 0; i < perm.size(); ++i) c.y[i] = y[perm[i]];
    }
  }
  auto ova = downstream::train_one_vs_all(x_train, cols, config.logreg);
  ClfResult r{std::move(ova.model), {}, std::move(ova.errors)};
  if (!r.model.tasks.empty()) {
    r.report = downstream::evaluate(r.model, x_test, downstream::label_columns(test_emb, config.label_rule));
  }
  r.report.n_evaluated = test_emb.size();
  return r;
}

ClfResult cmd_train_eval_clf(const std::string& train_manifest, const std::string& test_manifest,
                             const RunConfig& config, const std::string& out_dir) {
  const auto train = data::load_dataset(train_manifest);
  const auto test = data::load_dataset(test_manifest);
  auto r = train_eval_clf(train, test, config);
  make_dir(out_dir);
  write_text((fs::path(out_dir) / "report.csv").string(), metrics_csv(r.report));
  if (!r.errors.empty()) write_text((fs::path(out_dir) / "errors.txt").string(), join(r.errors, "\n") + "\n");
  if (!r.model.tasks.empty()) {
    save_mlrw((fs::path(out_dir) / "classifier.mlrw").string(),
              downstream::classifier_tensors(r.model, config.label_rule));
  }
  return r;
}

downstream::MetricsReport cmd_eval(const std::string& classifier_path, const std::string& emb_manifest,
                                   const std::string& out_dir, double threshold) {
  const auto clf = downstream::classifier_from_tensors(load_mlrw(classifier_path));
  const auto d = data::load_dataset(emb_manifest);
  const auto x = embedding_matrix(d);
  auto rep = downstream::evaluate(clf.model, x, downstream::label_columns(d, clf.rule), threshold);
  make_dir(out_dir);
  write_text((fs::path(out_dir) / "report.csv").string(), metrics_csv(rep));
  return rep;
}

AblationReport cmd_ablate(const RunConfig& config, const std::string& out_dir) {
  const auto& ab = config.ablation;
  if (ab.modality_subsets.empty() && ab.dataset_combinations.empty()) {
    throw ConfigError("ablation lists no modality subsets and no dataset combinations");
  }
  if (config.datasets.empty()) throw ConfigError("no datasets configured");
  const std::string target_name = ab.eval_dataset.empty() ? config.datasets.front().name : ab.eval_dataset;
  DatasetRef target;
  for (const auto& d : config.datasets)
    if (d.name == target_name) target = d;
  make_dir(out_dir);

  struct Job {
    std::string kind, label;
    RunConfig cfg;
  };
  std::vector<Job> jobs;
  for (const auto& subset : ab.modality_subsets) {
    RunConfig c = config;
    c.modalities = subset;
    jobs.push_back({"modalities", join(subset, "+"), c});
  }
  for (const auto& combo : ab.dataset_combinations) {
    RunConfig c = config;
    c.datasets.clear();
    for (const auto& name : combo)
      for (const auto& d : config.datasets)
        if (d.name == name) c.datasets.push_back(d);
    jobs.push_back({"datasets", join(combo, "+"), c});
  }

  AblationReport rep;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto dir = (fs::path(out_dir) / ("row" + std::to_string(i))).string();
    const auto cae_run = cmd_train_cae(jobs[i].cfg, dir);
    const auto train_emb = (fs::path(dir) / "embed" / "train.mlrd").string();
    const auto test_emb = (fs::path(dir) / "embed" / "test.mlrd").string();
    cmd_embed(cae_run.weights_path, (fs::path(target.dir) / "train.mlrd").string(), train_emb, config.limit);
    cmd_embed(cae_run.weights_path, (fs::path(target.dir) / "test.mlrd").string(), test_emb, config.limit);
    const auto clf = cmd_train_eval_clf(train_emb, test_emb, jobs[i].cfg, (fs::path(dir) / "clf").string());
    rep.rows.push_back({jobs[i].kind, jobs[i].label, cae_run.report.best_val_mse, clf.report.tasks});
  }
  write_text((fs::path(out_dir) / "ablation.csv").string(), ablation_csv(rep));
  return rep;
}

ParamReport count_params(const cae::CaeArchitecture& arch, nn::Extent2 input) {
  const auto b = cae::count_parameters(arch);
  const auto chain = cae::compute_shape_chain(arch, input);
  ParamReport r;
  for (const auto& l : b.layers) r.rows.push_back({l.name, l.count});
  r.encoder_total = b.encoder_total;
  r.decoder_total = b.decoder_total;
  r.code_size = chain.code_size();
  r.with_one_task = r.encoder_total + (r.code_size + 1);
  r.with_four_tasks = r.encoder_total + 4 * (r.code_size + 1);
  r.rows.push_back({"encoder_total", r.encoder_total});
  r.rows.push_back({"decoder_total", r.decoder_total});
  r.rows.push_back({"total", b.total});
  r.rows.push_back({"code_size", r.code_size});
  r.rows.push_back({"encoder+lr_1_task", r.with_one_task});
  r.rows.push_back({"encoder+lr_4_tasks", r.with_four_tasks});

  auto alt = arch;
  const bool code_bn = arch.encoder.back().has_batchnorm;
  alt.encoder.back().has_batchnorm = !code_bn;
  const auto other = cae::count_parameters(alt).encoder_total;
  const std::size_t code_ch = static_cast<std::size_t>(arch.encoder.back().out_channels);
  if (code_bn) {
    r.notes.push_back("code-layer batchnorm adds gamma+beta for " + std::to_string(code_ch) + " channels: encoder " +
                      std::to_string(r.encoder_total) + " vs " + std::to_string(other) + " without it (delta " +
                      std::to_string(r.encoder_total - other) + ")");
  } else {
    r.notes.push_back("batchnorm on the code layer as well would add gamma+beta for " + std::to_string(code_ch) +
                      " channels: encoder " + std::to_string(other) + " (delta +" +
                      std::to_string(other - r.encoder_total) + ")");
  }
  return r;
}

ParamReport cmd_count_params(const std::string& weights_path) {
  const auto b = cae::load_weights(weights_path);
  return count_params(b.model.architecture(), b.model.input_extent());
}

ParamReport cmd_count_params(const RunConfig& config) {
  std::vector<data::Block> blocks = config.synth.blocks;
  std::size_t timesteps = config.synth.timesteps;
  if (!config.datasets.empty()) {
    const auto path = (fs::path(config.datasets.front().dir) / "train.mlrd").string();
    const auto text = read_file_bytes(path);
    const auto m = data::parse_manifest(std::string(text.begin(), text.end()));
    blocks = m.blocks;
    timesteps = m.timesteps;
  }
  std::size_t width = 0;
  if (config.modalities.empty()) {
    for (const auto& b : blocks) width += b.width;
  } else {
    for (const auto& name : config.modalities) {
      const auto it = std::find_if(blocks.begin(), blocks.end(), [&](const data::Block& b) { return b.name == name; });
      if (it == blocks.end()) throw ConfigError("modality '" + name + "' is not a block of the configured data");
      width += it->width;
    }
  }
  return count_params(architecture_named(config.architecture),
                      {static_cast<int>(timesteps), static_cast<int>(width)});
}

data::SynthSplits cmd_synth(const RunConfig& config, const std::string& out_dir) {
  auto s = data::synth_generate(config.synth);
  make_dir(out_dir);
  for (auto* d : {&s.train, &s.val, &s.test}) {
    data::save_dataset(*d, (fs::path(out_dir) / (d->split + ".mlrd")).string());
  }
  return s;
}

std::string history_csv(const cae::TrainReport& r) {
  std::string s = "epoch,train_mse,val_mse,lr\n";
  s += "0,," + fmt(r.initial_val_mse) + ",\n";
  for (const auto& e : r.history) {
    s += std::to_string(e.epoch) + "," + fmt(e.train_mse) + "," + fmt(e.val_mse) + "," + fmt(e.lr) + "\n";
  }
  return s;
}

std::string metrics_csv(const downstream::MetricsReport& r) {
  std::string s = "task,accuracy,weighted_f1,tp,fp,tn,fn,n\n";
  for (const auto& t : r.tasks) {
    const auto& c = t.confusion;
    s += t.name + "," + fmt(t.accuracy) + "," + fmt(t.weighted_f1) + "," + std::to_string(c.tp) + "," +
         std::to_string(c.fp) + "," + std::to_string(c.tn) + "," + std::to_string(c.fn) + "," +
         std::to_string(r.n_evaluated) + "\n";
  }
  return s;
}

std::string ablation_csv(const AblationReport& r) {
  std::string s = "kind,combination,val_mse";
  if (!r.rows.empty())
    for (const auto& t : r.rows.front().tasks) s += "," + t.name + "_acc," + t.name + "_f1";
  s += "\n";
  for (const auto& row : r.rows) {
    s += row.kind + "," + row.combination + "," + fmt(row.val_mse);
    for (const auto& t : row.tasks) s += "," + fmt(t.accuracy) + "," + fmt(t.weighted_f1);
    s += "\n";
  }
  return s;
}

std::string params_csv(const ParamReport& r) {
  std::string s = "name,count\n";
  for (const auto& row : r.rows) s += row.name + "," + std::to_string(row.count) + "\n";
  for (const auto& n : r.notes) s += "# " + n + "\n";
  return s;
}

std::string resolve_out_dir(const std::string& flag, const std::string& config_out, const std::string& verb) {
  if (!flag.empty()) return flag;
  if (!config_out.empty()) return config_out;
  if (const char* root = std::getenv("MLR_OUT_ROOT"); root && *root) return (fs::path(root) / verb).string();
  return (fs::path("runs") / verb).string();
}

}  // namespace mlr::experiments
