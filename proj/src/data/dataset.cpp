#include "mlr/data/dataset.hpp"

#include <algorithm>
#include <cstring>

namespace mlr::data {

std::vector<Block> reference_blocks() {
  return {{"audio", kAudioWidth}, {"vision", kVisionWidth}, {"text", kTextWidth}};
}

std::size_t Dataset::width() const {
  std::size_t w = 0;
  for (const auto& b : blocks) w += b.width;
  return w;
}

std::size_t Dataset::block_offset(const std::string& block) const {
  std::size_t off = 0;
  for (const auto& b : blocks) {
    if (b.name == block) return off;
    off += b.width;
  }
  throw ConfigError("dataset '" + name + "' has no modality block '" + block + "'");
}

std::size_t Dataset::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < label_schema.size(); ++i) {
    if (label_schema[i].name == label) return i;
  }
  throw ConfigError("dataset '" + name + "' has no label '" + label + "'");
}

void Dataset::validate() const {
  const Shape dims{timesteps, width()};
  for (const auto& r : records) {
    if (r.x.dims() != dims) {
      throw FormatError("record '" + r.id + "' has dims " + shape_str(r.x.dims()) +
                        ", dataset declares " + shape_str(dims));
    }
    if (r.labels.size() != label_schema.size()) {
      throw FormatError("record '" + r.id + "' has " + std::to_string(r.labels.size()) +
                        " labels, schema has " + std::to_string(label_schema.size()));
    }
  }
}

TensorD assemble_multimodal(std::span<const NamedMatrix> blocks) {
  if (blocks.empty()) throw ShapeError("assemble_multimodal needs at least one block");
  const std::size_t rows = blocks.front().matrix->dim(0);
  std::size_t width = 0;
  for (const auto& b : blocks) {
    if (b.matrix->rank() != 2) {
      throw ShapeError("modality '" + b.name + "' is not a matrix: " + shape_str(b.matrix->dims()));
    }
    if (b.matrix->dim(0) != rows) {
      throw ShapeError("alignment error: modality '" + blocks.front().name + "' has " +
                       std::to_string(rows) + " words but '" + b.name + "' has " +
                       std::to_string(b.matrix->dim(0)));
    }
    width += b.matrix->dim(1);
  }
  TensorD out({rows, width});
  std::size_t col = 0;
  for (const auto& b : blocks) {
    const std::size_t w = b.matrix->dim(1);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(b.matrix->data() + r * w, w, out.data() + r * width + col);
    }
    col += w;
  }
  return out;
}

TensorD assemble_multimodal(const TensorD& audio, const TensorD& vision, const TensorD& text) {
  const NamedMatrix blocks[] = {{"audio", &audio}, {"vision", &vision}, {"text", &text}};
  return assemble_multimodal(blocks);
}

template <typename T>
Tensor<T> fix_length(const Tensor<T>& x, std::size_t n) {
  if (x.rank() != 2) throw ShapeError("fix_length expects [words, M], got " + shape_str(x.dims()));
  const std::size_t words = x.dim(0), m = x.dim(1);
  if (words == n) return x;
  Tensor<T> out({n, m});
  if (words > n) {
    std::copy_n(x.data() + (words - n) * m, n * m, out.data());
  } else {
    std::copy_n(x.data(), words * m, out.data() + (n - words) * m);
  }
  return out;
}

template Tensor<float> fix_length(const Tensor<float>&, std::size_t);
template Tensor<double> fix_length(const Tensor<double>&, std::size_t);

Dataset select_blocks(const Dataset& d, const std::vector<std::string>& block_names) {
  if (block_names.empty()) throw ConfigError("modality selection is empty");
  Dataset out;
  out.name = d.name;
  out.split = d.split;
  out.timesteps = d.timesteps;
  out.label_schema = d.label_schema;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // (offset, width) in the source
  for (const auto& name : block_names) {
    const std::size_t off = d.block_offset(name);
    const auto it = std::find_if(d.blocks.begin(), d.blocks.end(),
                                 [&](const Block& b) { return b.name == name; });
    if (std::any_of(out.blocks.begin(), out.blocks.end(),
                    [&](const Block& b) { return b.name == name; })) {
      throw ConfigError("modality '" + name + "' selected twice");
    }
    out.blocks.push_back(*it);
    ranges.emplace_back(off, it->width);
  }
  const std::size_t src_w = d.width(), dst_w = out.width();
  out.records.reserve(d.records.size());
  for (const auto& r : d.records) {
    UtteranceRecord nr{TensorF({d.timesteps, dst_w}), r.labels, r.id, r.source_dataset};
    for (std::size_t t = 0; t < d.timesteps; ++t) {
      std::size_t col = 0;
      for (const auto& [off, w] : ranges) {
        std::copy_n(r.x.data() + t * src_w + off, w, nr.x.data() + t * dst_w + col);
        col += w;
      }
    }
    out.records.push_back(std::move(nr));
  }
  return out;
}

Dataset concat_datasets(const std::vector<const Dataset*>& parts, const std::string& name) {
  if (parts.empty()) throw ConfigError("no datasets to concatenate");
  Dataset out;
  out.name = name;
  out.split = parts.front()->split;
  out.timesteps = parts.front()->timesteps;
  out.blocks = parts.front()->blocks;
  out.label_schema = parts.front()->label_schema;
  for (const auto* p : parts) {
    if (p->blocks != out.blocks || p->timesteps != out.timesteps) {
      throw FormatError("dataset '" + p->name + "' has a different layout than '" +
                        parts.front()->name + "'");
    }
    if (p->label_schema != out.label_schema) {
      // Heterogeneous tasks (e.g. sentiment + emotions) can share AE training;
      // labels are dropped in that case.
      out.label_schema.clear();
    }
  }
  for (const auto* p : parts) {
    for (const auto& r : p->records) {
      out.records.push_back(r);
      if (out.label_schema.empty()) out.records.back().labels.clear();
    }
  }
  return out;
}

TensorF stack_inputs(const std::vector<UtteranceRecord>& records) {
  if (records.empty()) throw ShapeError("cannot stack an empty record list");
  const Shape& d = records.front().x.dims();
  TensorF out({records.size(), 1, d[0], d[1]});
  const std::size_t stride = d[0] * d[1];
  for (std::size_t i = 0; i < records.size(); ++i) {
    require_same_dims(records[i].x.dims(), d, "stack_inputs record");
    std::copy_n(records[i].x.data(), stride, out.data() + i * stride);
  }
  return out;
}

}  // namespace mlr::data
