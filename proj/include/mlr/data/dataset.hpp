#pragma once

#include <string>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::data {

inline constexpr std::size_t kTimesteps = 20;

/// Reference block widths (acoustic, visual, textual).
inline constexpr std::size_t kAudioWidth = 74;
inline constexpr std::size_t kVisionWidth = 35;
inline constexpr std::size_t kTextWidth = 300;

struct Block {
  std::string name;
  std::size_t width = 0;
  friend bool operator==(const Block&, const Block&) = default;
};

std::vector<Block> reference_blocks();

enum class LabelKind { signed_score, binary };

struct LabelField {
  std::string name;
  LabelKind kind = LabelKind::binary;
  friend bool operator==(const LabelField&, const LabelField&) = default;
};

/// One utterance: the [N, M] multimodal matrix plus labels in schema order.
struct UtteranceRecord {
  TensorF x;
  std::vector<float> labels;
  std::string id;
  std::string source_dataset;
};

struct Dataset {
  std::string name;
  std::string split;
  std::size_t timesteps = kTimesteps;
  std::vector<Block> blocks;
  std::vector<LabelField> label_schema;
  std::vector<UtteranceRecord> records;

  std::size_t width() const;
  std::size_t size() const { return records.size(); }
  /// Column offset of the named block; throws ConfigError if absent.
  std::size_t block_offset(const std::string& block) const;
  std::size_t label_index(const std::string& label) const;

  /// Throws FormatError when any record disagrees with the declared dims or
  /// label count.
  void validate() const;
};

struct NamedMatrix {
  std::string name;
  const TensorD* matrix;
};

/// Column-wise concatenation in the given order; all blocks must share the
/// row count, otherwise ShapeError names the disagreeing modalities.
TensorD assemble_multimodal(std::span<const NamedMatrix> blocks);
TensorD assemble_multimodal(const TensorD& audio, const TensorD& vision, const TensorD& text);

/// Keeps the last N rows when longer, prepends zero rows when shorter.
template <typename T>
Tensor<T> fix_length(const Tensor<T>& x, std::size_t n = kTimesteps);

/// Restricts every record to the named blocks (in the order given).
Dataset select_blocks(const Dataset& d, const std::vector<std::string>& block_names);

/// Concatenates records of datasets sharing blocks, timesteps and schema.
Dataset concat_datasets(const std::vector<const Dataset*>& parts, const std::string& name);

/// Stacks records into a [B, 1, N, M] batch tensor.
TensorF stack_inputs(const std::vector<UtteranceRecord>& records);

}  // namespace mlr::data
