#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "simmst/metrics.hpp"
#include "simmst/rng.hpp"

using namespace simmst;

namespace {

// Textbook formulas, written independently of metrics.cpp, as the reference
// route for randomized comparisons.
double mae_oracle(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - t[i]);
  return s / p.size();
}

double rmse_oracle(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return std::sqrt(s / p.size());
}

double pearson_oracle(const std::vector<double>& p,
                      const std::vector<double>& t) {
  double mp = 0, mt = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    mp += p[i];
    mt += t[i];
  }
  mp /= p.size();
  mt /= t.size();
  double c = 0, vp = 0, vt = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    c += (p[i] - mp) * (t[i] - mt);
    vp += (p[i] - mp) * (p[i] - mp);
    vt += (t[i] - mt) * (t[i] - mt);
  }
  return c / std::sqrt(vp * vt);
}

}  // namespace

TEST_CASE("frozen error examples") {
  // diffs {3, -4}
  std::vector<double> pred = {5.0, 1.0};
  std::vector<double> truth = {2.0, 5.0};
  CHECK(mae(pred, truth) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(rmse(pred, truth) ==
        doctest::Approx(3.5355339059327378).epsilon(1e-15));
}

TEST_CASE("contracts") {
  CHECK_THROWS_AS(mae({}, {}), ContractError);
  CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), ContractError);
  CHECK_THROWS_AS(rmse({1.0, 2.0}, {1.0}), ContractError);
  CHECK_THROWS_AS(mean_series_corr({1, 2, 3}, {1, 2, 3}, 2), ContractError);
  CHECK_THROWS_AS(mean_series_corr({1, 2}, {1, 2}, 0), ContractError);
}

TEST_CASE("randomized comparison against reference formulas") {
  Rng rng(40);
  for (int rep = 0; rep < 50; ++rep) {
    size_t n = 2 + rng.below(30);
    std::vector<double> p(n), t(n);
    for (size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform(-10, 10);
      t[i] = rng.uniform(-10, 10);
    }
    CHECK(mae(p, t) == doctest::Approx(mae_oracle(p, t)).epsilon(1e-12));
    CHECK(rmse(p, t) == doctest::Approx(rmse_oracle(p, t)).epsilon(1e-12));
    auto r = pearson(p, t);
    if (r)  // random continuous data is never constant
      CHECK(*r == doctest::Approx(pearson_oracle(p, t)).epsilon(1e-12));
  }
}

TEST_CASE("correlation identity cases") {
  std::vector<double> t = {1.0, 3.0, -2.0, 0.5, 4.0};
  std::vector<double> neg(t.size());
  for (size_t i = 0; i < t.size(); ++i) neg[i] = -t[i];
  CHECK(std::fabs(*pearson(t, t) - 1.0) < 1e-12);
  CHECK(std::fabs(*pearson(neg, t) + 1.0) < 1e-12);
}

TEST_CASE("correlation degenerate cases") {
  std::vector<double> constant = {2.0, 2.0, 2.0};
  std::vector<double> moving = {1.0, 2.0, 3.0};
  CHECK_FALSE(pearson(moving, constant).has_value());  // constant truth
  auto r = pearson(constant, moving);
  REQUIRE(r.has_value());
  CHECK(*r == 0.0);  // constant prediction
}

TEST_CASE("correlation invariance properties") {
  Rng rng(41);
  std::vector<double> p(20), t(20);
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.uniform(-5, 5);
    t[i] = rng.uniform(-5, 5);
  }
  double base = *pearson(p, t);

  // Positive affine maps leave Pearson unchanged.
  std::vector<double> p2(p.size()), t2(t.size());
  for (size_t i = 0; i < p.size(); ++i) {
    p2[i] = 3.0 * p[i] + 7.0;
    t2[i] = 0.5 * t[i] - 2.0;
  }
  CHECK(*pearson(p2, t2) == doctest::Approx(base).epsilon(1e-12));

  // Joint permutation leaves every metric unchanged.
  std::vector<size_t> order(p.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffler(42);
  shuffler.shuffle(order);
  std::vector<double> ps(p.size()), ts(t.size());
  for (size_t i = 0; i < order.size(); ++i) {
    ps[i] = p[order[i]];
    ts[i] = t[order[i]];
  }
  CHECK(*pearson(ps, ts) == doctest::Approx(base).epsilon(1e-12));
  CHECK(mae(ps, ts) == doctest::Approx(mae(p, t)).epsilon(1e-12));
  CHECK(rmse(ps, ts) == doctest::Approx(rmse(p, t)).epsilon(1e-12));
}

TEST_CASE("mean_series_corr excludes constant-truth series") {
  // Two series, sample-major. Series 0: identical pred/truth (corr 1).
  // Series 1: constant truth, excluded.
  std::vector<double> truth = {1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0};
  std::vector<double> pred = {1.0, 0.0, 2.0, 9.0, 3.0, -3.0, 4.0, 2.0};
  auto r = mean_series_corr(pred, truth, 2);
  REQUIRE(r.has_value());
  CHECK(std::fabs(*r - 1.0) < 1e-12);

  // All truth constant: undefined.
  std::vector<double> flat = {5.0, 5.0, 5.0, 5.0};
  CHECK_FALSE(mean_series_corr({1, 2, 3, 4}, flat, 2).has_value());

  // Mix of correlated and anticorrelated series averages to 0.
  std::vector<double> t2 = {1, 1, 2, 2, 3, 3, 4, 4};
  std::vector<double> p2 = {1, -1, 2, -2, 3, -3, 4, -4};
  auto mixed = mean_series_corr(p2, t2, 2);
  REQUIRE(mixed.has_value());
  CHECK(std::fabs(*mixed) < 1e-12);
}

TEST_CASE("metric table csv layout") {
  MetricTable table;
  table.mode_names = {"taxi", "bike"};
  table.per_step.resize(2);
  table.pooled.resize(2);
  table.per_step[0][3] = {1.5, 2.0, 0.75};
  table.per_step[0][6] = {1.75, 2.25, std::nullopt};
  table.pooled[0] = {1.6, 2.1, 0.5};
  table.per_step[1][3] = {0.5, 0.75, 1.0};
  table.pooled[1] = {0.5, 0.75, 1.0};
  std::string csv = table.to_csv();
  CHECK(csv ==
        "mode,horizon,mae,rmse,corr\n"
        "taxi,3,1.5,2,0.75\n"
        "taxi,6,1.75,2.25,nan\n"
        "taxi,all,1.6000000000000001,2.1000000000000001,0.5\n"
        "bike,3,0.5,0.75,1\n"
        "bike,all,0.5,0.75,1\n");
}
