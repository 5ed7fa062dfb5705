#include <doctest.h>

#include <random>

#include "mlr/nn/conv.hpp"
#include "mlr/nn/gradcheck.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::nn;
using mlr::test::random_tensor;

namespace {

ConvLayerSpec make_spec(int in, int out, int k, int pad, int stride = 1) {
  return {in, out, {k, k}, {pad, pad}, {stride, stride}, false, Activation::identity};
}

}  // namespace

TEST_CASE("conv2d output dims for the reference first layer") {
  const auto spec = make_spec(1, 32, 3, 2);
  TensorF in({1, 1, 20, 409}, 0.5f);
  TensorF w({32, 1, 3, 3}, 0.1f);
  TensorF b({32});
  const auto out = conv2d_forward(in, w, b, spec);
  CHECK(out.dims() == Shape{1, 32, 22, 411});
}

TEST_CASE("1x1 identity kernel reproduces the input") {
  const auto spec = make_spec(1, 1, 1, 0);
  const auto in = random_tensor({2, 1, 5, 7}, 3);
  TensorD w({1, 1, 1, 1}, 1.0);
  TensorD b({1}, 0.0);
  CHECK(conv2d_forward(in, w, b, spec) == in);

  TensorD g = random_tensor({2, 1, 5, 7}, 4);
  auto grads = conv2d_backward(g, in, w, spec);
  CHECK(grads.input == g);
}

TEST_CASE("3x3 ones kernel over 3x3 ones sums to 9") {
  const auto spec = make_spec(1, 1, 3, 0);
  TensorD in({1, 1, 3, 3}, 1.0), w({1, 1, 3, 3}, 1.0), b({1}, 0.0);
  const auto out = conv2d_forward(in, w, b, spec);
  REQUIRE(out.dims() == Shape{1, 1, 1, 1});
  CHECK(out[0] == doctest::Approx(9.0));
}

TEST_CASE("conv2d matches direct summation on random inputs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    ConvLayerSpec s{pick(1, 3), pick(1, 4), {pick(1, 4), pick(1, 4)}, {pick(0, 2), pick(0, 2)},
                    {pick(1, 2), pick(1, 2)}, false, Activation::identity};
    const auto in = random_tensor({2, std::size_t(s.in_channels), 6, 7}, seed + 100);
    const auto w = random_tensor({std::size_t(s.out_channels), std::size_t(s.in_channels),
                                  std::size_t(s.kernel.h), std::size_t(s.kernel.w)},
                                 seed + 200);
    const auto b = random_tensor({std::size_t(s.out_channels)}, seed + 300);
    const auto fast = conv2d_forward(in, w, b, s);
    const auto slow = test::naive_conv(in, w, b, s);
    REQUIRE(fast.dims() == slow.dims());
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]));
  }
}

TEST_CASE("conv2d output dims follow the closed form in a randomized sweep") {
  std::mt19937_64 rng(11);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 200; ++trial) {
    const int k = pick(1, 5), p = pick(0, 3), s = pick(1, 3);
    const int h = pick(std::max(1, k - 2 * p), 12), w = pick(std::max(1, k - 2 * p), 12);
    ConvLayerSpec spec{1, 1, {k, k}, {p, p}, {s, s}, false, Activation::identity};
    TensorF in({1, 1, std::size_t(h), std::size_t(w)}, 1.0f);
    TensorF wt({1, 1, std::size_t(k), std::size_t(k)}, 1.0f);
    TensorF b({1});
    const auto out = conv2d_forward(in, wt, b, spec);
    CHECK(out.dim(2) == std::size_t((h + 2 * p - k) / s + 1));
    CHECK(out.dim(3) == std::size_t((w + 2 * p - k) / s + 1));
  }
}

TEST_CASE("conv2d shape errors name both shapes") {
  const auto spec = make_spec(2, 3, 3, 0);
  TensorF in({1, 1, 5, 5}), w({3, 2, 3, 3}), b({3});
  try {
    conv2d_forward(in, w, b, spec);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[1x1x5x5]") != std::string::npos);
    CHECK(msg.find("[3x2x3x3]") != std::string::npos);
  }
  TensorF small({1, 2, 1, 1});
  CHECK_THROWS_AS(conv2d_forward(small, w, b, spec), ShapeError);
}

TEST_CASE("conv2d_backward without a cache is a usage error") {
  const auto spec = make_spec(1, 1, 3, 1);
  TensorF g({1, 1, 4, 4}), w({1, 1, 3, 3});
  CHECK_THROWS_AS(conv2d_backward(g, TensorF{}, w, spec), UsageError);
}

TEST_CASE("zero upstream gradient gives zero conv gradients") {
  const auto spec = make_spec(2, 3, 3, 1);
  const auto in = random_tensor({2, 2, 4, 5}, 1);
  const auto w = random_tensor({3, 2, 3, 3}, 2);
  TensorD g({2, 3, 4, 5});
  const auto grads = conv2d_backward(g, in, w, spec);
  for (auto v : grads.input.values()) CHECK(v == 0.0);
  for (auto v : grads.weights.values()) CHECK(v == 0.0);
  for (auto v : grads.bias.values()) CHECK(v == 0.0);
}

TEST_CASE("conv2d backward matches finite differences (20 seeds)") {
  const auto spec = make_spec(1, 2, 3, 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor({1, 1, 4, 4}, seed);
    const auto w = random_tensor({2, 1, 3, 3}, seed + 1000);
    const auto b = random_tensor({2}, seed + 2000);
    const auto r = random_tensor({1, 2, 4, 4}, seed + 3000);

    const ScalarFn wrt_input = [&](const TensorD& in, TensorD* grad) {
      if (grad) *grad = conv2d_backward(r, in, w, spec).input;
      return test::dot(conv2d_forward(in, w, b, spec), r);
    };
    const ScalarFn wrt_weights = [&](const TensorD& wt, TensorD* grad) {
      if (grad) *grad = conv2d_backward(r, x, wt, spec).weights;
      return test::dot(conv2d_forward(x, wt, b, spec), r);
    };
    const ScalarFn wrt_bias = [&](const TensorD& bb, TensorD* grad) {
      if (grad) *grad = conv2d_backward(r, x, w, spec).bias;
      return test::dot(conv2d_forward(x, w, bb, spec), r);
    };
    CHECK(finite_diff_check(wrt_input, x, 1e-5).max_rel_error <= 1e-4);
    CHECK(finite_diff_check(wrt_weights, w, 1e-5).max_rel_error <= 1e-4);
    CHECK(finite_diff_check(wrt_bias, b, 1e-5).max_rel_error <= 1e-4);
  }
}

TEST_CASE("forward and backward leave their inputs untouched") {
  const auto spec = make_spec(2, 2, 3, 2);
  const auto x = random_tensor({2, 2, 5, 6}, 5);
  const auto w = random_tensor({2, 2, 3, 3}, 6);
  const auto b = random_tensor({2}, 7);
  const TensorD x0 = x, w0 = w, b0 = b;
  const auto out = conv2d_forward(x, w, b, spec);
  const auto g = random_tensor(out.dims(), 8);
  const TensorD g0 = g;
  conv2d_backward(g, x, w, spec);
  CHECK(x == x0);
  CHECK(w == w0);
  CHECK(b == b0);
  CHECK(g == g0);
}
