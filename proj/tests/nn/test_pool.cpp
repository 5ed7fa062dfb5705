#include <doctest.h>

#include "mlr/nn/gradcheck.hpp"
#include "mlr/nn/pool.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::nn;
using mlr::test::random_tensor;

TEST_CASE("maxpool picks the window max") {
  TensorD in({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  const auto r = maxpool2x2_forward(in);
  REQUIRE(r.output.dims() == Shape{1, 1, 1, 1});
  CHECK(r.output[0] == 4.0);

  TensorD ones({1, 1, 1, 1}, 1.0);
  const auto g = maxpool2x2_backward(ones, r.argmax, in.dims());
  CHECK(g == TensorD({1, 1, 2, 2}, std::vector<double>{0, 0, 0, 1}));
}

TEST_CASE("maxpool floors odd extents") {
  TensorF in({1, 32, 22, 411}, 1.0f);
  CHECK(maxpool2x2_forward(in).output.dims() == Shape{1, 32, 11, 205});
}

TEST_CASE("maxpool rejects extents below 2") {
  CHECK_THROWS_AS(maxpool2x2_forward(TensorF({1, 1, 1, 4})), ShapeError);
  CHECK_THROWS_AS(maxpool2x2_forward(TensorF({1, 1, 4, 1})), ShapeError);
}

TEST_CASE("constant input ties route to the first cell of each window") {
  TensorD in({1, 2, 5, 5}, 3.0);
  const auto r = maxpool2x2_forward(in);
  for (auto v : r.output.values()) CHECK(v == 3.0);
  TensorD g(r.output.dims(), 1.0);
  const auto gi = maxpool2x2_backward(g, r.argmax, in.dims());
  // Brute-force expectation: top-left of every full window, nothing in the
  // dropped fifth row/column.
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t x = 0; x < 5; ++x) {
        const bool winner = y < 4 && x < 4 && y % 2 == 0 && x % 2 == 0;
        CHECK(gi(0, c, y, x) == (winner ? 1.0 : 0.0));
      }
}

TEST_CASE("maxpool backward conserves gradient mass and zeroes dropped cells") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor({2, 3, 7, 9}, seed);
    const auto r = maxpool2x2_forward(x);
    const auto g = random_tensor(r.output.dims(), seed + 50);
    const auto gi = maxpool2x2_backward(g, r.argmax, x.dims());
    double s_in = 0, s_out = 0;
    for (auto v : gi.values()) s_in += v;
    for (auto v : g.values()) s_out += v;
    CHECK(s_in == doctest::Approx(s_out).epsilon(1e-12));
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t x0 = 0; x0 < 9; ++x0) CHECK(gi(b, c, 6, x0) == 0.0);
        for (std::size_t y0 = 0; y0 < 7; ++y0) CHECK(gi(b, c, y0, 8) == 0.0);
      }
  }
}

TEST_CASE("zero upstream gradient through maxpool is zero") {
  const auto x = random_tensor({1, 1, 4, 4}, 2);
  const auto r = maxpool2x2_forward(x);
  const auto gi = maxpool2x2_backward(TensorD(r.output.dims()), r.argmax, x.dims());
  for (auto v : gi.values()) CHECK(v == 0.0);
}

TEST_CASE("maxpool backward rejects a mismatched argmax map") {
  const auto x = random_tensor({1, 1, 4, 4}, 2);
  const auto r = maxpool2x2_forward(x);
  CHECK_THROWS_AS(maxpool2x2_backward(TensorD({1, 1, 2, 2}), r.argmax, Shape{1, 1, 5, 4}),
                  UsageError);
  CHECK_THROWS_AS(maxpool2x2_backward(TensorD({1, 1, 3, 2}), r.argmax, x.dims()), UsageError);
}

TEST_CASE("pool over a linear map matches finite differences on 6x7 inputs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor({1, 1, 6, 7}, seed);
    const auto r = random_tensor({1, 1, 3, 3}, seed + 99);
    const ScalarFn fn = [&](const TensorD& in, TensorD* grad) {
      const auto p = maxpool2x2_forward(in);
      if (grad) *grad = maxpool2x2_backward(r, p.argmax, in.dims());
      return test::dot(p.output, r);
    };
    // eps well below the smallest gap between window entries keeps argmax fixed.
    CHECK(finite_diff_check(fn, x, 1e-6).max_rel_error <= 1e-4);
  }
}

TEST_CASE("upsample_to expands by nearest neighbour") {
  TensorD one({1, 1, 1, 1}, 2.5);
  CHECK(upsample_to_forward(one, 2, 2) == TensorD({1, 1, 2, 2}, 2.5));

  TensorF code({1, 10, 1, 25}, 1.0f);
  CHECK(upsample_to_forward(code, 3, 51).dims() == Shape{1, 10, 3, 51});

  const auto x = random_tensor({2, 3, 4, 5}, 1);
  CHECK(upsample_to_forward(x, 4, 5) == x);

  TensorD row({1, 1, 1, 3}, std::vector<double>{1, 2, 3});
  const auto up = upsample_to_forward(row, 1, 7);
  // floor(x*3/7): 0 0 0 1 1 2 2
  CHECK(up == TensorD({1, 1, 1, 7}, std::vector<double>{1, 1, 1, 2, 2, 3, 3}));

  CHECK_THROWS_AS(upsample_to_forward(x, 3, 5), ShapeError);
}

TEST_CASE("upsample_to backward matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor({1, 2, 3, 4}, seed);
    const std::size_t th = 3 + seed % 4, tw = 4 + seed % 5;
    const auto r = random_tensor({1, 2, th, tw}, seed + 7);
    const ScalarFn fn = [&](const TensorD& in, TensorD* grad) {
      if (grad) *grad = upsample_to_backward(r, in.dims());
      return test::dot(upsample_to_forward(in, th, tw), r);
    };
    CHECK(finite_diff_check(fn, x, 1e-5).max_rel_error <= 1e-4);
  }
}
