#include <doctest.h>

#include "mlr/data/scaler.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::data;

namespace {

std::vector<UtteranceRecord> records_from(const std::vector<std::vector<float>>& rows_per_utt,
                                          std::size_t width) {
  std::vector<UtteranceRecord> out;
  for (const auto& flat : rows_per_utt) {
    out.push_back({TensorF({flat.size() / width, width}, flat), {}, "u", "d"});
  }
  return out;
}

}  // namespace

TEST_CASE("constant feature is flagged degenerate and maps to 0.5") {
  const auto recs = records_from({{4, 1, 4, 3}, {4, 5, 4, 7}}, 2);
  const auto s = fit_scalers(recs, "train");
  CHECK(s.mean[0] == 4.0);
  CHECK(s.degenerate[0]);
  CHECK(s.std[0] == 1.0);
  CHECK(s.min[0] == 0.0);
  CHECK(s.max[0] == 0.0);
  CHECK_FALSE(s.degenerate[1]);
  const auto xn = apply_scalers(recs[0].x, s);
  CHECK(xn(0, 0) == 0.5f);
  CHECK(xn(1, 0) == 0.5f);
}

TEST_CASE("values {0,2} standardize to {-1,+1} with population std") {
  const auto recs = records_from({{0, 2}, {2, 0}}, 1);
  const auto s = fit_scalers(recs, "train");
  CHECK(s.mean[0] == 1.0);
  CHECK(s.std[0] == 1.0);
  CHECK(s.min[0] == -1.0);
  CHECK(s.max[0] == 1.0);
  CHECK(s.width() == 1);
  CHECK(s.fitted_on == "train");
}

TEST_CASE("stats vectors all have width M") {
  std::vector<UtteranceRecord> recs;
  for (std::uint64_t i = 0; i < 5; ++i) recs.push_back({test::random_tensor({20, 13}, i).cast<float>(), {}, "u", "d"});
  const auto s = fit_scalers(recs, "train");
  CHECK(s.mean.size() == 13);
  CHECK(s.std.size() == 13);
  CHECK(s.min.size() == 13);
  CHECK(s.max.size() == 13);
  CHECK(s.degenerate.size() == 13);
}

TEST_CASE("applied to the fit set every column spans exactly [0,1]") {
  std::vector<UtteranceRecord> recs;
  for (std::uint64_t i = 0; i < 8; ++i) {
    recs.push_back({test::random_tensor({20, 6}, i, -50, 300).cast<float>(), {}, "u", "d"});
  }
  const auto s = fit_scalers(recs, "train");
  std::vector<double> lo(6, 1e9), hi(6, -1e9);
  for (const auto& r : recs) {
    const auto xn = apply_scalers(r.x.cast<double>(), s);
    for (std::size_t t = 0; t < 20; ++t)
      for (std::size_t f = 0; f < 6; ++f) {
        lo[f] = std::min(lo[f], xn(t, f));
        hi[f] = std::max(hi[f], xn(t, f));
      }
  }
  for (std::size_t f = 0; f < 6; ++f) {
    CHECK(lo[f] == doctest::Approx(0.0));
    CHECK(hi[f] == doctest::Approx(1.0));
  }
}

TEST_CASE("values beyond the training range are clipped") {
  const auto recs = records_from({{0, 2}, {2, 0}}, 1);
  const auto s = fit_scalers(recs, "train");
  TensorF probe({3, 1}, std::vector<float>{-5, 1, 9});
  const auto xn = apply_scalers(probe, s);
  CHECK(xn[0] == 0.0f);
  CHECK(xn[1] == 0.5f);
  CHECK(xn[2] == 1.0f);
}

TEST_CASE("scaler composition matches a direct two-step hand computation") {
  // column values over the fit set: 1, 3, 4, 8 -> mean 4, population std sqrt(6.5)
  const auto recs = records_from({{1, 3}, {4, 8}}, 1);
  const auto s = fit_scalers(recs, "train");
  const double sd = std::sqrt(6.5);
  const double zmin = (1 - 4) / sd, zmax = (8 - 4) / sd;
  CHECK(s.std[0] == doctest::Approx(sd));
  const double z3 = (3 - 4) / sd;
  const double expected = (z3 - zmin) / (zmax - zmin);
  CHECK(apply_scalers(recs[0].x.cast<double>(), s)(1, 0) == doctest::Approx(expected));
  CHECK(expected == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("refitting on normalized data is idempotent") {
  std::vector<UtteranceRecord> recs;
  for (std::uint64_t i = 0; i < 6; ++i) {
    recs.push_back({test::random_tensor({20, 5}, i + 40, -3, 7).cast<float>(), {}, "u", "d"});
  }
  const auto s1 = fit_scalers(recs, "train");
  std::vector<UtteranceRecord> normalized;
  for (const auto& r : recs) normalized.push_back({apply_scalers(r.x, s1), {}, "u", "d"});
  const auto s2 = fit_scalers(normalized, "train");
  for (const auto& r : normalized) {
    const auto again = apply_scalers(r.x.cast<double>(), s2);
    for (std::size_t i = 0; i < again.size(); ++i) {
      CHECK(std::abs(again[i] - static_cast<double>(r.x[i])) <= 1e-9);
    }
  }
}

TEST_CASE("width mismatch is a shape error") {
  const auto recs = records_from({{0, 2}, {2, 0}}, 1);
  const auto s = fit_scalers(recs, "train");
  CHECK_THROWS_AS(apply_scalers(TensorF({2, 2}), s), ShapeError);
  CHECK_THROWS_AS(fit_scalers(std::span<const UtteranceRecord>{}, "train"), ShapeError);
}
