#include <doctest.h>

#include <random>

#include "mlr/data/align.hpp"
#include "mlr/data/dataset.hpp"
#include "mlr/data/scaler.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::data;

namespace {

RawModalityTrack uniform_track(std::size_t frames, double frame_len, double value,
                               std::size_t width = 2) {
  RawModalityTrack t{width, {}};
  for (std::size_t i = 0; i < frames; ++i) {
    t.frames.push_back({i * frame_len, (i + 1) * frame_len, std::vector<double>(width, value)});
  }
  return t;
}

}  // namespace

TEST_CASE("aligning a constant track gives the constant in every row") {
  const auto track = uniform_track(50, 0.01, 3.25);
  const WordIntervals words{{0.0, 0.13}, {0.13, 0.2}, {0.21, 0.48}};
  const auto r = word_align(track, words);
  CHECK_FALSE(r.empty_track);
  for (auto v : r.aligned.values()) CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("two equal-duration frames with 0 and 2 average to 1") {
  RawModalityTrack t{1, {{0.1, 0.2, {0.0}}, {0.2, 0.3, {2.0}}}};
  const auto r = word_align(t, {{0.0, 0.5}});
  CHECK(r.aligned(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("partial overlaps weight by overlap duration") {
  // word [0.15, 0.3): 0.05 s of value 0, 0.1 s of value 3 -> 2.0
  RawModalityTrack t{1, {{0.1, 0.2, {0.0}}, {0.2, 0.3, {3.0}}}};
  CHECK(word_align(t, {{0.15, 0.3}}).aligned(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("a word with no overlapping frame gets a zero row") {
  RawModalityTrack t{2, {{0.0, 0.1, {1.0, 1.0}}, {0.5, 0.6, {1.0, 1.0}}}};
  const auto r = word_align(t, {{0.0, 0.1}, {0.2, 0.4}, {0.5, 0.6}});
  CHECK(r.aligned(1, 0) == 0.0);
  CHECK(r.aligned(1, 1) == 0.0);
  CHECK(r.aligned(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("an empty track gives zeros with the warning flag") {
  RawModalityTrack t{3, {}};
  const auto r = word_align(t, {{0.0, 1.0}, {1.0, 2.0}});
  CHECK(r.empty_track);
  CHECK(r.aligned.dims() == Shape{2, 3});
  for (auto v : r.aligned.values()) CHECK(v == 0.0);
}

TEST_CASE("word_align validates its inputs") {
  RawModalityTrack t{1, {{0.0, 0.1, {1.0}}}};
  CHECK_THROWS_AS(word_align(t, {}), ShapeError);
  CHECK_THROWS_AS(word_align(t, {{0.2, 0.1}}), FormatError);
  RawModalityTrack overlap{1, {{0.0, 0.2, {1.0}}, {0.1, 0.3, {1.0}}}};
  CHECK_THROWS_AS(word_align(overlap, {{0.0, 1.0}}), FormatError);
  RawModalityTrack ragged{2, {{0.0, 0.2, {1.0}}}};
  CHECK_THROWS_AS(word_align(ragged, {{0.0, 1.0}}), FormatError);
}

TEST_CASE("splitting a frame into two equal-valued halves leaves the expectation unchanged") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    RawModalityTrack t{3, {}};
    double clock = 0;
    for (int f = 0; f < 30; ++f) {
      const double len = 0.005 + 0.02 * u(rng);
      t.frames.push_back({clock, clock + len, {u(rng), -u(rng), 5 * u(rng)}});
      clock += len + (u(rng) < 0.2 ? 0.01 : 0.0);
    }
    WordIntervals words;
    double w = 0;
    while (w < clock) {
      const double len = 0.02 + 0.1 * u(rng);
      words.push_back({w, w + len});
      w += len;
    }
    const std::size_t victim = static_cast<std::size_t>(u(rng) * t.frames.size());
    RawModalityTrack split = t;
    const auto f = t.frames[victim];
    const double cut = f.start + (f.end - f.start) * (0.1 + 0.8 * u(rng));
    split.frames[victim].end = cut;
    split.frames.insert(split.frames.begin() + victim + 1, {cut, f.end, f.features});
    const auto a = word_align(t, words).aligned;
    const auto b = word_align(split, words).aligned;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
  }
}

TEST_CASE("assembling the reference blocks gives 409 columns in audio, vision, text order") {
  TensorD a({20, 74}, 1.0), v({20, 35}, 2.0), t({20, 300}, 3.0);
  const auto x = assemble_multimodal(a, v, t);
  CHECK(x.dims() == Shape{20, 409});
  CHECK(x(7, 0) == 1.0);
  CHECK(x(7, 73) == 1.0);
  CHECK(x(7, 74) == 2.0);
  CHECK(x(7, 108) == 2.0);
  CHECK(x(7, 109) == 3.0);
  CHECK(x(7, 408) == 3.0);
}

TEST_CASE("single-block assembly keeps the width; zero blocks stay zero") {
  TensorD a({5, 74});
  const NamedMatrix one[] = {{"audio", &a}};
  CHECK(assemble_multimodal(one).dims() == Shape{5, 74});
  TensorD v({5, 35}), t({5, 300});
  const auto z = assemble_multimodal(a, v, t);
  CHECK(z.dims() == Shape{5, 409});
  for (auto x : z.values()) CHECK(x == 0.0);
}

TEST_CASE("mismatched word counts raise an alignment error naming the modalities") {
  TensorD a({5, 2}), v({4, 2}), t({5, 2});
  try {
    assemble_multimodal(a, v, t);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("audio") != std::string::npos);
    CHECK(msg.find("vision") != std::string::npos);
  }
}

TEST_CASE("fix_length keeps the last N rows or zero-pads at the front") {
  TensorD x20({20, 3});
  for (std::size_t i = 0; i < x20.size(); ++i) x20[i] = double(i);
  CHECK(fix_length(x20) == x20);

  TensorD x25({25, 2});
  for (std::size_t r = 0; r < 25; ++r) x25(r, 0) = x25(r, 1) = double(r + 1);  // 1-based row ids
  const auto f25 = fix_length(x25);
  REQUIRE(f25.dims() == Shape{20, 2});
  CHECK(f25(0, 0) == 6.0);
  CHECK(f25(19, 1) == 25.0);

  TensorD x3({3, 2}, 7.0);
  const auto f3 = fix_length(x3);
  for (std::size_t r = 0; r < 17; ++r) CHECK(f3(r, 0) == 0.0);
  for (std::size_t r = 17; r < 20; ++r) CHECK(f3(r, 1) == 7.0);
}

TEST_CASE("assemble, fix_length, apply_scalers always yields 20xM in [0,1]") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> words(1, 35);
  std::vector<UtteranceRecord> train;
  auto make = [&](std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(words(rng));
    const auto a = test::random_tensor({n, 4}, seed, -10, 10);
    const auto v = test::random_tensor({n, 3}, seed + 1, 0, 100);
    const auto t = test::random_tensor({n, 5}, seed + 2, -1, 1);
    return fix_length(assemble_multimodal(a, v, t)).cast<float>();
  };
  for (std::uint64_t s = 0; s < 40; ++s) train.push_back({make(s * 3), {}, "u", "d"});
  const auto stats = fit_scalers(train, "train");
  for (std::uint64_t s = 1000; s < 1040; ++s) {
    const auto xn = apply_scalers(make(s * 3), stats);
    CHECK(xn.dims() == Shape{20, 12});
    for (auto v : xn.values()) CHECK((v >= 0.0f && v <= 1.0f));
  }
}
