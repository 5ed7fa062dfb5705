#include "mlr/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mlr::data {

namespace {

struct FeatureSpace {
  std::vector<TensorD> projection;  // per block: [width, latent]
  std::vector<std::vector<double>> offset;
  std::vector<std::vector<double>> scale;
  std::vector<double> period;  // per latent dimension
  std::vector<double> angle;
};

FeatureSpace make_feature_space(const SynthConfig& c) {
  std::mt19937_64 rng(c.feature_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  FeatureSpace fs;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.latent_dim));
  for (const auto& b : c.blocks) {
    TensorD p({b.width, c.latent_dim});
    for (auto& v : p.values()) v = normal(rng) * inv_sqrt_d;
    std::vector<double> off(b.width), sc(b.width);
    for (std::size_t f = 0; f < b.width; ++f) {
      off[f] = 3.0 * normal(rng);
      sc[f] = std::exp(0.75 * normal(rng));
    }
    fs.projection.push_back(std::move(p));
    fs.offset.push_back(std::move(off));
    fs.scale.push_back(std::move(sc));
  }
  for (std::size_t j = 0; j < c.latent_dim; ++j) {
    fs.period.push_back(8.0 + 16.0 * uni(rng));
    fs.angle.push_back(2.0 * std::numbers::pi * uni(rng));
  }
  return fs;
}

std::vector<LabelField> schema_for(std::size_t classes) {
  if (classes == 2) return {{"sentiment", LabelKind::signed_score}};
  static const char* emotions[] = {"happy", "sad", "angry", "neutral"};
  std::vector<LabelField> s;
  for (std::size_t k = 0; k < classes; ++k) {
    s.push_back({classes == 4 ? emotions[k] : "class" + std::to_string(k), LabelKind::binary});
  }
  return s;
}

}  // namespace

double synth_latent_bayes_accuracy(double noise_std) {
  if (noise_std <= 0) return 1.0;
  return 0.5 * std::erfc(-(1.0 / noise_std) / std::numbers::sqrt2);
}

SynthSplits synth_generate(const SynthConfig& c) {
  if (c.class_count < 2) throw ConfigError("synth needs at least two classes");
  if (c.n_utterances < c.class_count) {
    throw ConfigError("synth needs n_utterances >= class_count");
  }
  if (c.blocks.empty() || c.latent_dim == 0 || c.timesteps == 0) {
    throw ConfigError("synth needs blocks, a latent dimension and timesteps");
  }
  if (c.noise_std < 0) throw ConfigError("synth noise_std must be non-negative");
  std::vector<bool> carries(c.blocks.size(), c.signal_blocks.empty());
  for (const auto& s : c.signal_blocks) {
    const auto it = std::find_if(c.blocks.begin(), c.blocks.end(),
                                 [&](const Block& b) { return b.name == s; });
    if (it == c.blocks.end()) throw ConfigError("signal block '" + s + "' is not a synth block");
    carries[static_cast<std::size_t>(it - c.blocks.begin())] = true;
  }

  const auto fs = make_feature_space(c);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::size_t d = c.latent_dim;

  // Two classes sit at -u and +u; more classes at independent unit directions.
  std::vector<std::vector<double>> prototypes(c.class_count, std::vector<double>(d));
  auto unit = [&] {
    std::vector<double> v(d);
    double n = 0;
    for (auto& x : v) {
      x = normal(rng);
      n += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
  };
  if (c.class_count == 2) {
    const auto u = unit();
    for (std::size_t j = 0; j < d; ++j) {
      prototypes[0][j] = -u[j];
      prototypes[1][j] = u[j];
    }
  } else {
    for (auto& p : prototypes) p = unit();
  }

  const auto schema = schema_for(c.class_count);
  std::vector<UtteranceRecord> records(c.n_utterances);
  std::vector<double> z(d), nuisance(d), env(d), latent_t(d);
  for (std::size_t i = 0; i < c.n_utterances; ++i) {
    const std::size_t cls = i % c.class_count;
    for (std::size_t j = 0; j < d; ++j) z[j] = prototypes[cls][j] + c.noise_std * normal(rng);
    for (std::size_t j = 0; j < d; ++j) nuisance[j] = normal(rng);
    const double phase = uni(rng) * static_cast<double>(c.timesteps);

    std::vector<TensorD> aligned;
    for (std::size_t b = 0; b < c.blocks.size(); ++b) {
      const auto& block = c.blocks[b];
      const auto& src = carries[b] ? z : nuisance;
      TensorD m({c.timesteps, block.width});
      for (std::size_t t = 0; t < c.timesteps; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
          env[j] = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * (t + phase) / fs.period[j] +
                                        fs.angle[j]);
          latent_t[j] = src[j] * env[j];
        }
        for (std::size_t f = 0; f < block.width; ++f) {
          double s = 0;
          for (std::size_t j = 0; j < d; ++j) s += fs.projection[b](f, j) * latent_t[j];
          s += c.noise_std * normal(rng);
          m(t, f) = fs.offset[b][f] + fs.scale[b][f] * s;
        }
      }
      aligned.push_back(std::move(m));
    }
    std::vector<NamedMatrix> named;
    for (std::size_t b = 0; b < c.blocks.size(); ++b) named.push_back({c.blocks[b].name, &aligned[b]});
    const auto x = fix_length(assemble_multimodal(named), c.timesteps);

    auto& r = records[i];
    r.x = x.cast<float>();
    r.id = c.name + "_" + std::to_string(i);
    r.source_dataset = c.name;
    if (c.class_count == 2) {
      const double magnitude = 0.2 + 2.8 * uni(rng);
      r.labels = {static_cast<float>(cls == 1 ? magnitude : -magnitude)};
    } else {
      r.labels.assign(c.class_count, 0.0f);
      r.labels[cls] = 1.0f;
    }
  }

  std::vector<std::size_t> order(c.n_utterances);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = c.n_utterances * 70 / 100;
  const std::size_t n_val = c.n_utterances * 15 / 100;

  SynthSplits out;
  Dataset* parts[] = {&out.train, &out.val, &out.test};
  const char* names[] = {"train", "val", "test"};
  for (int p = 0; p < 3; ++p) {
    parts[p]->name = c.name;
    parts[p]->split = names[p];
    parts[p]->timesteps = c.timesteps;
    parts[p]->blocks = c.blocks;
    parts[p]->label_schema = schema;
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    Dataset& dst = k < n_train ? out.train : (k < n_train + n_val ? out.val : out.test);
    dst.records.push_back(std::move(records[order[k]]));
  }
  return out;
}

std::size_t synth_class_of(const Dataset& d, const UtteranceRecord& r) {
  if (d.label_schema.size() == 1 && d.label_schema[0].kind == LabelKind::signed_score) {
    return r.labels.at(0) > 0 ? 1 : 0;
  }
  const auto it = std::max_element(r.labels.begin(), r.labels.end());
  return static_cast<std::size_t>(it - r.labels.begin());
}

}  // namespace mlr::data
