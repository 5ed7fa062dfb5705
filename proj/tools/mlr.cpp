#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "mlr/error.hpp"
#include "mlr/experiments/commands.hpp"
#include "mlr/experiments/gradcheck_suite.hpp"

using namespace mlr;
using namespace mlr::experiments;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kNumeric = 4, kIo = 5 };

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::size_t limit = 0;
  int precision = 0;
};

RunConfig make_config(const Globals& g, CLI::App& app) {
  RunConfig c = g.config.empty() ? parse_run_config("{}") : load_run_config(g.config);
  if (app.count("--seed")) c.seed = g.seed;
  if (app.count("--limit")) c.limit = g.limit;
  if (app.count("--precision")) c.precision = g.precision;
  c.finalize();
  return c;
}

void print_metrics(const downstream::MetricsReport& r) { std::cout << metrics_csv(r); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlr: multimodal convolutional autoencoder embeddings + logistic regression"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--out", g.out, "output directory (default $MLR_OUT_ROOT/<verb> or runs/<verb>)");
  app.add_option("--limit", g.limit, "cap utterances per split (0: no cap)");
  app.add_option("--precision", g.precision, "32 or 64")->check(CLI::IsMember({32, 64}));

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset (config 'synth' section)");
  auto* train_cae = app.add_subcommand("train-cae", "pretrain the autoencoder on the configured datasets");

  auto* embed = app.add_subcommand("embed", "encode a dataset split with a trained model");
  std::string weights, data, out_file;
  embed->add_option("--weights", weights, "weights file")->required();
  embed->add_option("--data", data, "dataset manifest (.mlrd)")->required();
  embed->add_option("--output", out_file, "embedding manifest to write (default <out>/<split>.mlrd)");

  auto* train_clf = app.add_subcommand("train-clf", "train logistic regression on embeddings and score the test set");
  std::string train_emb, test_emb;
  train_clf->add_option("--train", train_emb, "training embeddings (.mlrd)")->required();
  train_clf->add_option("--test", test_emb, "test embeddings (.mlrd)")->required();

  auto* eval = app.add_subcommand("eval", "score a saved classifier on embeddings");
  std::string clf_path, eval_data;
  double threshold = 0.5;
  eval->add_option("--classifier", clf_path, "classifier.mlrw")->required();
  eval->add_option("--data", eval_data, "embeddings (.mlrd)")->required();
  eval->add_option("--threshold", threshold, "decision threshold");

  auto* ablate = app.add_subcommand("ablate", "modality / dataset-combination ablation table");

  auto* count = app.add_subcommand("count-params", "per-layer parameter breakdown");
  std::string count_weights;
  count->add_option("--weights", count_weights, "weights file (otherwise the config)");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  GradCheckOptions gc;
  gradcheck->add_option("--seeds", gc.seeds, "random trials per op");
  gradcheck->add_option("--op", gc.only, "restrict to these ops");
  gradcheck->add_option("--inject-fault", gc.inject_fault, "scale this op's analytic gradient by 1.01");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (gradcheck->parsed()) {
      if (app.count("--seed")) gc.base_seed = g.seed;
      const auto rows = run_gradcheck_suite(gc);
      bool ok = true;
      std::printf("op,trials,max_rel_error,worst_seed,status\n");
      for (const auto& r : rows) {
        std::printf("%s,%zu,%.3e,%llu,%s\n", r.op.c_str(), r.trials, r.max_rel_error,
                    static_cast<unsigned long long>(r.worst_seed), r.pass ? "pass" : "FAIL");
        ok = ok && r.pass;
      }
      return ok ? kOk : kNumeric;
    }

    const RunConfig cfg = make_config(g, app);
    auto out_for = [&](const std::string& verb) { return resolve_out_dir(g.out, cfg.out, verb); };

    if (synth->parsed()) {
      const auto dir = out_for("synth");
      const auto s = cmd_synth(cfg, dir);
      std::printf("wrote %s: train %zu, val %zu, test %zu utterances of width %zu\n", dir.c_str(),
                  s.train.size(), s.val.size(), s.test.size(), s.train.width());
    } else if (train_cae->parsed()) {
      const auto dir = out_for("train-cae");
      const auto r = cmd_train_cae(cfg, dir);
      std::printf("trained on %zu utterances (val %zu), K=%zu, best epoch %zu, best val MSE %.6g\n%s\n",
                  r.train_size, r.val_size, r.code_size, r.report.best_epoch, r.report.best_val_mse,
                  r.weights_path.c_str());
    } else if (embed->parsed()) {
      const auto split = std::filesystem::path(data).stem().string();
      const auto dest = out_file.empty() ? (std::filesystem::path(out_for("embed")) / (split + ".mlrd")).string()
                                         : out_file;
      const auto e = cmd_embed(weights, data, dest, cfg.limit);
      std::printf("wrote %s: %zu x %zu\n", dest.c_str(), e.size(), e.width());
    } else if (train_clf->parsed()) {
      const auto r = cmd_train_eval_clf(train_emb, test_emb, cfg, out_for("train-clf"));
      for (const auto& e : r.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
      print_metrics(r.report);
      if (r.model.tasks.empty()) return kData;
    } else if (eval->parsed()) {
      print_metrics(cmd_eval(clf_path, eval_data, out_for("eval"), threshold));
    } else if (ablate->parsed()) {
      std::cout << ablation_csv(cmd_ablate(cfg, out_for("ablate")));
    } else if (count->parsed()) {
      std::cout << params_csv(count_weights.empty() ? cmd_count_params(cfg) : cmd_count_params(count_weights));
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumeric;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const EvaluationError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
}
