#pragma once

#include <vector>

#include "mlr/tensor.hpp"

namespace mlr::data {

struct Frame {
  double start = 0;  // seconds
  double end = 0;
  std::vector<double> features;
};

/// Time-ordered, non-overlapping frames of constant width.
struct RawModalityTrack {
  std::size_t width = 0;
  std::vector<Frame> frames;

  /// Throws FormatError on overlap, disorder or width drift.
  void validate() const;
};

struct WordInterval {
  double start = 0;
  double end = 0;
};

using WordIntervals = std::vector<WordInterval>;

struct AlignResult {
  TensorD aligned;  // [num_words, width]
  bool empty_track = false;
};

/// Row i is the overlap-duration-weighted mean of every frame intersecting
/// word i; words touching no frame get a zero row. An empty track yields an
/// all-zero matrix with `empty_track` set.
AlignResult word_align(const RawModalityTrack& track, const WordIntervals& words);

}  // namespace mlr::data
