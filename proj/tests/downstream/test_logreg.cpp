#include <doctest.h>

#include <cmath>
#include <random>

#include "mlr/data/synth.hpp"
#include "mlr/downstream/tasks.hpp"
#include "mlr/nn/gradcheck.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::downstream;

namespace {

struct Problem {
  TensorD x;
  std::vector<int> y;
};

// Gaussian classes around +-mu along a random direction.
Problem blobs(std::size_t n, std::size_t k, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> dir(k);
  for (auto& d : dir) d = g(rng);
  Problem p{TensorD({n, k}), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    p.y[i] = i % 2;
    const double s = p.y[i] ? sep : -sep;
    for (std::size_t j = 0; j < k; ++j) p.x(i, j) = s * dir[j] / std::sqrt(double(k)) + g(rng);
  }
  return p;
}

std::vector<double> logits(const TaskModel& t, const TensorD& x) {
  std::vector<double> z(x.dim(0), t.b);
  for (std::size_t i = 0; i < x.dim(0); ++i)
    for (std::size_t j = 0; j < x.dim(1); ++j) z[i] += t.w[j] * x(i, j);
  return z;
}

}  // namespace

TEST_CASE("separable 1-D pair puts the boundary at zero") {
  TensorD x({2, 1}, std::vector<double>{-1, 1});
  LogRegConfig cfg;
  cfg.C = 1e4;
  const auto m = train_logreg(x, {0, 1}, cfg);
  CHECK(m.report.converged);
  const double boundary = -m.b / m.w[0];
  CHECK(std::abs(boundary) <= 0.1);
  LogRegModel model{{m}, cfg};
  CHECK(binary_accuracy(predict(model, x)[0].label, {0, 1}) == 1.0);
}

TEST_CASE("all-zero embeddings fit the intercept to the class log-odds") {
  for (std::size_t pos : {1u, 3u, 7u}) {
    std::vector<int> y(10, 0);
    for (std::size_t i = 0; i < pos; ++i) y[i] = 1;
    LogRegConfig cfg;
    cfg.tol = 1e-12;
    const auto m = train_logreg(TensorD({10, 6}), y, cfg);
    const double p = pos / 10.0;
    CHECK(m.report.converged);
    CHECK(m.b == doctest::Approx(std::log(p / (1 - p))).epsilon(1e-9));
    for (double w : m.w) CHECK(std::abs(w) < 1e-12);
  }
}

TEST_CASE("single-class labels name the task") {
  try {
    train_logreg(TensorD({4, 2}), {1, 1, 1, 1}, {}, "happy");
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("happy") != std::string::npos);
  }
  CHECK_THROWS_AS(train_logreg(TensorD({1, 2}), {1}, {}), TrainingError);
  CHECK_THROWS_AS(train_logreg(TensorD({3, 2}), {0, 1}, {}), ShapeError);
  LogRegConfig bad;
  bad.C = 0;
  CHECK_THROWS_AS(train_logreg(TensorD({2, 2}), {0, 1}, bad), ConfigError);
}

TEST_CASE("logistic loss gradient matches finite differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = blobs(30, 7, 1.0, seed);
    const nn::ScalarFn fn = [&](const TensorD& theta, TensorD* grad) {
      std::vector<double> w(theta.values().begin(), theta.values().end() - 1), gw;
      double gb = 0;
      const double f = logreg_objective(p.x, p.y, w, theta[7], 0.5, grad ? &gw : nullptr, &gb);
      if (grad) {
        for (std::size_t j = 0; j < 7; ++j) (*grad)[j] = gw[j];
        (*grad)[7] = gb;
      }
      return f;
    };
    const auto theta = test::random_tensor({8}, seed + 100);
    CHECK(nn::finite_diff_check(fn, theta, 1e-6).max_rel_error <= 1e-4);
  }
}

TEST_CASE("objective never increases across iterations, for both solvers") {
  for (Solver s : {Solver::newton, Solver::gradient}) {
    LogRegConfig cfg;
    cfg.solver = s;
    cfg.max_iter = 300;
    const auto p = blobs(200, 12, 2.0, 9);
    const auto m = train_logreg(p.x, p.y, cfg);
    const auto& h = m.report.objective_history;
    REQUIRE(h.size() >= 2);
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
    CHECK(h.back() < h.front());
  }
}

TEST_CASE("newton and gradient descent agree on a well-conditioned problem") {
  const auto p = blobs(150, 5, 1.5, 3);
  LogRegConfig n, g;
  g.solver = Solver::gradient;
  g.max_iter = 20000;
  const auto a = train_logreg(p.x, p.y, n), b = train_logreg(p.x, p.y, g);
  CHECK(a.report.converged);
  CHECK(b.report.converged);
  CHECK(a.report.iterations < 50);
  for (std::size_t j = 0; j < 5; ++j) CHECK(a.w[j] == doctest::Approx(b.w[j]).epsilon(1e-4));
  CHECK(a.b == doctest::Approx(b.b).epsilon(1e-4));
}

TEST_CASE("training is deterministic") {
  const auto p = blobs(120, 10, 1.0, 4);
  const auto a = train_logreg(p.x, p.y, {}), b = train_logreg(p.x, p.y, {});
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
}

TEST_CASE("scaling embeddings by c and weights by 1/c leaves predictions unchanged") {
  const auto p = blobs(80, 6, 1.0, 12);
  LogRegModel m{{train_logreg(p.x, p.y, {})}, {}};
  const auto base = predict(m, p.x);
  for (double c : {0.5, 3.0, 1024.0}) {
    auto scaled_x = p.x;
    for (auto& v : scaled_x.values()) v *= c;
    auto scaled = m;
    for (auto& w : scaled.tasks[0].w) w /= c;
    const auto q = predict(scaled, scaled_x);
    CHECK(q[0].label == base[0].label);
    for (std::size_t i = 0; i < q[0].probability.size(); ++i)
      CHECK(q[0].probability[i] == doctest::Approx(base[0].probability[i]).epsilon(1e-12));
  }
}

TEST_CASE("predict: zero model, negation, monotonicity, width check") {
  const auto x = test::random_tensor({40, 3}, 1);
  LogRegModel zero{{TaskModel{"t", {0, 0, 0}, 0, {}}}, {}};
  const auto zp = predict(zero, x);
  for (double pr : zp[0].probability) CHECK(pr == 0.5);

  LogRegModel m{{TaskModel{"t", {0.7, -1.2, 0.3}, 0.1, {}}}, {}};
  auto neg = m;
  for (auto& w : neg.tasks[0].w) w = -w;
  neg.tasks[0].b = -neg.tasks[0].b;
  const auto a = predict(m, x)[0], b = predict(neg, x)[0];
  const auto z = logits(m.tasks[0], x);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 0) CHECK(a.label[i] != b.label[i]);
    for (std::size_t j = 0; j < z.size(); ++j)
      if (z[i] < z[j]) CHECK(a.probability[i] <= a.probability[j]);
  }
  CHECK_THROWS_AS(predict(m, TensorD({2, 4})), ShapeError);
}

TEST_CASE("parameter count is tasks times (K+1)") {
  TaskModel t{"sentiment", std::vector<double>(250), 0, {}};
  LogRegModel one{{t}, {}};
  CHECK(one.parameter_count() == 251);
  LogRegModel four{{t, t, t, t}, {}};
  CHECK(four.parameter_count() == 1004);
}

TEST_CASE("one-vs-all: identical columns, permutation, count, per-task errors") {
  const auto p = blobs(60, 4, 1.0, 2);
  std::vector<int> other(60);
  for (std::size_t i = 0; i < 60; ++i) other[i] = (i / 3) % 2;
  const auto same = train_one_vs_all(p.x, {{"a", p.y}, {"b", p.y}, {"c", p.y}, {"d", p.y}}, {});
  REQUIRE(same.model.tasks.size() == 4);
  for (const auto& t : same.model.tasks) {
    CHECK(t.w == same.model.tasks[0].w);
    CHECK(t.b == same.model.tasks[0].b);
  }
  const auto fwd = train_one_vs_all(p.x, {{"a", p.y}, {"b", other}}, {});
  const auto rev = train_one_vs_all(p.x, {{"b", other}, {"a", p.y}}, {});
  CHECK(fwd.model.tasks[0].w == rev.model.tasks[1].w);
  CHECK(fwd.model.tasks[1].w == rev.model.tasks[0].w);
  CHECK(rev.model.tasks[0].name == "b");

  const auto partial = train_one_vs_all(p.x, {{"a", p.y}, {"flat", std::vector<int>(60, 0)}, {"b", other}}, {});
  CHECK(partial.model.tasks.size() == 2);
  REQUIRE(partial.errors.size() == 1);
  CHECK(partial.errors[0].find("flat") != std::string::npos);
}

TEST_CASE("noiseless synthetic data is fit with 100% training accuracy") {
  data::SynthConfig sc;
  sc.n_utterances = 200;
  sc.noise_std = 0;
  sc.blocks = {{"audio", 12}, {"vision", 8}, {"text", 16}};
  const auto s = data::synth_generate(sc);
  const auto& d = s.train;
  // time-averaged features as a stand-in embedding
  TensorD x({d.size(), d.width()});
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t t = 0; t < d.timesteps; ++t)
      for (std::size_t j = 0; j < d.width(); ++j) x(i, j) += d.records[i].x(t, j) / d.timesteps;
  const auto cols = label_columns(d);
  LogRegConfig cfg;
  cfg.C = 1e3;
  const LogRegModel m{{train_logreg(x, cols[0].y, cfg, cols[0].name)}, cfg};
  CHECK(evaluate(m, x, cols).tasks[0].accuracy == 1.0);
}

TEST_CASE("label rule: strict versus inclusive zero") {
  data::Dataset d;
  d.label_schema = {{"sentiment", data::LabelKind::signed_score}, {"happy", data::LabelKind::binary}};
  for (float v : {-1.0f, 0.0f, 0.5f}) d.records.push_back({TensorF({1, 1}), {v, v > 0 ? 1.0f : 0.0f}, "", ""});
  const auto strict = label_columns(d);
  const auto incl = label_columns(d, {true});
  CHECK(strict[0].y == std::vector<int>{0, 0, 1});
  CHECK(incl[0].y == std::vector<int>{0, 1, 1});
  CHECK(strict[1].y == std::vector<int>{0, 0, 1});
  CHECK(incl[1].y == strict[1].y);
}

TEST_CASE("evaluate reports confusion counts summing to n and rejects unknown tasks") {
  const auto p = blobs(50, 3, 1.0, 8);
  const LogRegModel m{{train_logreg(p.x, p.y, {}, "sentiment")}, {}};
  const auto r = evaluate(m, p.x, {{"sentiment", p.y}});
  REQUIRE(r.tasks.size() == 1);
  CHECK(r.n_evaluated == 50);
  CHECK(r.tasks[0].confusion.total() == 50);
  CHECK(r.tasks[0].accuracy >= 0);
  CHECK(r.tasks[0].accuracy <= 1);
  CHECK_THROWS_AS(evaluate(m, p.x, {{"other", p.y}}), ConfigError);
}

TEST_CASE("classifier heads round-trip through MLRW tensors") {
  const auto p = blobs(40, 5, 1.0, 6);
  auto ova = train_one_vs_all(p.x, {{"happy", p.y}, {"sad", p.y}}, {});
  ova.model.config.C = 2.0;
  const auto bytes = encode_mlrw(classifier_tensors(ova.model, {true}));
  const auto back = classifier_from_tensors(decode_mlrw(bytes, "heads"));
  CHECK(back.rule.zero_is_positive);
  CHECK(back.model.config.C == 2.0);
  REQUIRE(back.model.tasks.size() == 2);
  CHECK(back.model.tasks[1].name == "sad");
  for (std::size_t j = 0; j < 5; ++j) CHECK(back.model.tasks[0].w[j] == float(ova.model.tasks[0].w[j]));
  CHECK(back.model.tasks[0].b == float(ova.model.tasks[0].b));
  CHECK_THROWS_AS(classifier_from_tensors({}), FormatError);
}
