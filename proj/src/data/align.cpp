#include "mlr/data/align.hpp"

#include <algorithm>

namespace mlr::data {

void RawModalityTrack::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.features.size() != width) {
      throw FormatError("frame " + std::to_string(i) + " has width " +
                        std::to_string(f.features.size()) + ", track width is " +
                        std::to_string(width));
    }
    if (!(f.end >= f.start)) {
      throw FormatError("frame " + std::to_string(i) + " ends before it starts");
    }
    if (i > 0 && f.start < frames[i - 1].end) {
      throw FormatError("frame " + std::to_string(i) + " overlaps or precedes frame " +
                        std::to_string(i - 1));
    }
  }
}

AlignResult word_align(const RawModalityTrack& track, const WordIntervals& words) {
  if (words.empty()) throw ShapeError("word_align needs at least one word interval");
  if (track.width == 0) throw ShapeError("word_align needs a positive track width");
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!(words[i].start < words[i].end)) {
      throw FormatError("word " + std::to_string(i) + " has start >= end");
    }
    if (i > 0 && words[i].start < words[i - 1].start) {
      throw FormatError("word intervals are not time-ordered at word " + std::to_string(i));
    }
  }
  track.validate();

  AlignResult r{TensorD({words.size(), track.width}), track.frames.empty()};
  if (r.empty_track) return r;

  // Frames are sorted and disjoint, so a forward-moving lower bound suffices
  // for non-decreasing word starts.
  std::size_t first = 0;
  std::vector<double> acc(track.width);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& word = words[w];
    while (first < track.frames.size() && track.frames[first].end <= word.start) ++first;
    std::fill(acc.begin(), acc.end(), 0.0);
    double total = 0;
    for (std::size_t f = first; f < track.frames.size() && track.frames[f].start < word.end; ++f) {
      const auto& frame = track.frames[f];
      const double overlap = std::min(frame.end, word.end) - std::max(frame.start, word.start);
      if (overlap <= 0) continue;
      total += overlap;
      for (std::size_t k = 0; k < track.width; ++k) acc[k] += overlap * frame.features[k];
    }
    if (total > 0) {
      for (std::size_t k = 0; k < track.width; ++k) r.aligned(w, k) = acc[k] / total;
    }
  }
  return r;
}

}  // namespace mlr::data
