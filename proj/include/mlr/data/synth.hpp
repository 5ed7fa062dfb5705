#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlr/data/dataset.hpp"

namespace mlr::data {

/// Desk-scale stand-in for an aligned multimodal corpus.
///
/// Each utterance draws a class c, a latent code z = prototype_c + noise_std * e
/// (e ~ N(0, I)) and a temporal phase. Signal blocks carry P_b (z * g(t + phase))
/// where g is a smooth per-latent envelope; non-signal blocks carry the same
/// construction driven by a class-independent latent. Every entry gets
/// N(0, noise_std^2) observation noise, then a per-feature offset and scale.
///
/// Feature semantics (projections, envelopes, offsets, scales) come from
/// `feature_seed`, so corpora generated with different `seed`s share them the
/// way two real corpora share a feature extractor. Prototypes, utterances and
/// split assignment come from `seed`.
struct SynthConfig {
  std::string name = "synth";
  std::size_t n_utterances = 1000;
  std::size_t class_count = 2;
  double noise_std = 0.78;
  std::vector<Block> blocks = reference_blocks();
  std::vector<std::string> signal_blocks;  // empty: every block carries signal
  std::size_t timesteps = kTimesteps;
  std::size_t latent_dim = 8;
  std::uint64_t seed = 1;
  std::uint64_t feature_seed = 0x5eed;
};

struct SynthSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// 70/15/15 split. Two classes produce a signed `sentiment` label (positive
/// class > 0); more classes produce one binary flag per class (named after the
/// four reference emotions when class_count == 4).
SynthSplits synth_generate(const SynthConfig& config);

/// Accuracy of the Bayes rule on the latent code for two classes with unit
/// prototype half-distance: Phi(1 / noise_std). Observation noise lowers the
/// achievable accuracy only marginally because it averages out over the
/// N * M entries.
double synth_latent_bayes_accuracy(double noise_std);

/// Class index recovered from a record's labels under the generator's schema.
std::size_t synth_class_of(const Dataset& d, const UtteranceRecord& r);

}  // namespace mlr::data
