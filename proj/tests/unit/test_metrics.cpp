#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lagcast/metrics.hpp"
#include "lagcast/random.hpp"
#include "test_support.hpp"

namespace lagcast {
namespace {

ScoredForecast one(double rr, double point, double lo, double hi) { return {{rr}, {point}, {lo}, {hi}, 0.95}; }

// Straight transcription of the two formulas, one month at a time.
double oracle_nrmse(const ScoredForecast& s) {
  const double m = static_cast<double>(s.observed.size());
  double mean = 0.0;
  for (double v : s.observed) mean += v / m;
  double sum = 0.0;
  for (std::size_t t = 0; t < s.observed.size(); ++t) sum += std::pow(s.observed[t] - s.point[t], 2);
  return std::sqrt(sum / (m * mean));
}

double oracle_nis(const ScoredForecast& s) {
  const double m = static_cast<double>(s.observed.size());
  double mean = 0.0;
  for (double v : s.observed) mean += v / m;
  double sum = 0.0;
  for (std::size_t t = 0; t < s.observed.size(); ++t) {
    const double rr = s.observed[t];
    double term = s.upper[t] - s.lower[t];
    if (rr < s.lower[t]) term += 2.0 / (1.0 - s.alpha) * (s.lower[t] - rr);
    if (rr > s.upper[t]) term += 2.0 / (1.0 - s.alpha) * (rr - s.upper[t]);
    sum += term;
  }
  return sum / (m * mean);
}

ScoredForecast random_scored(Rng& rng, int m) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  ScoredForecast s;
  for (int t = 0; t < m; ++t) {
    const double a = u(rng);
    const double b = u(rng);
    s.observed.push_back(u(rng) + 0.01);
    s.point.push_back(u(rng));
    s.lower.push_back(std::min(a, b));
    s.upper.push_back(std::max(a, b));
  }
  return s;
}

TEST(Nrmse, Examples) {
  EXPECT_EQ(nrmse(one(1.5, 1.5, 1.0, 2.0)), 0.0);
  EXPECT_NEAR(nrmse(one(2.0, 0.0, 0.0, 1.0)), 1.41421, 1e-5);
  EXPECT_DOUBLE_EQ(nrmse(one(2.0, 0.0, 0.0, 1.0)), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(nrmse_conventional(one(2.0, 0.0, 0.0, 1.0)), 1.0);
}

TEST(Nrmse, ScalesWithSquareRoot) {
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_scored(rng, 6);
    const double base = nrmse(s);
    const double c = 0.5 + rep * 0.3;
    for (auto* v : {&s.observed, &s.point, &s.lower, &s.upper}) {
      for (auto& x : *v) x *= c;
    }
    EXPECT_NEAR(nrmse(s), std::sqrt(c) * base, 1e-12 * (1.0 + base));
  }
}

TEST(Nis, Examples) {
  ScoredForecast covered = one(1.0, 1.0, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(nis(covered), 2.0);
  // Observation 3 above [0, 2]: width 2 plus 40 * 1. With one month the
  // normalizer m * mean RR is 3, so the unnormalized sum is the 42.
  const auto above = one(3.0, 1.0, 0.0, 2.0);
  EXPECT_NEAR(nis(above) * 3.0, 42.0, 1e-12);
  EXPECT_NEAR(nis(above), oracle_nis(above), 1e-15);
  // Below the interval is penalized symmetrically.
  EXPECT_NEAR(nis(one(0.5, 1.0, 1.5, 2.0)) * 0.5, 0.5 + 40.0 * 1.0, 1e-12);
}

TEST(Nis, WideningCoveringIntervalIncreasesScore) {
  auto s = one(1.0, 1.0, 0.5, 1.5);
  double prev = nis(s);
  for (int i = 0; i < 10; ++i) {
    s.upper[0] += 0.1;
    const double next = nis(s);
    EXPECT_GT(next, prev);
    prev = next;
  }
}

TEST(Metrics, MatchOracleAndInvariants) {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    auto s = random_scored(rng, 1 + rep % 12);
    EXPECT_NEAR(nrmse(s), oracle_nrmse(s), 1e-12);
    EXPECT_NEAR(nis(s), oracle_nis(s), 1e-12 * (1.0 + oracle_nis(s)));
    double width = 0.0;
    for (std::size_t t = 0; t < s.lower.size(); ++t) width += s.upper[t] - s.lower[t];
    EXPECT_GE(nis(s), width / static_cast<double>(s.lower.size()) / s.mean_observed() - 1e-12);

    // Permuting months changes nothing beyond rounding.
    auto p = s;
    std::vector<std::size_t> idx(p.observed.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      p.observed[i] = s.observed[idx[i]];
      p.point[i] = s.point[idx[i]];
      p.lower[i] = s.lower[idx[i]];
      p.upper[i] = s.upper[idx[i]];
    }
    EXPECT_NEAR(nrmse(p), nrmse(s), 1e-12);
    EXPECT_NEAR(nis(p), nis(s), 1e-12 * (1.0 + nis(s)));
  }
}

TEST(Nis, TightestCoveringIntervalIsOptimal) {
  // For a fixed observation, [rr, rr] beats any other interval.
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double rr = u(rng) + 0.1;
    const double a = u(rng);
    const double b = u(rng);
    const auto tight = nis(one(rr, rr, rr, rr));
    EXPECT_LE(tight, nis(one(rr, rr, std::min(a, b), std::max(a, b))) + 1e-15);
  }
}

TEST(Metrics, Errors) {
  test::expect_error(ErrorKind::ZeroMeanRisk, [] { nrmse(one(0.0, 1.0, 0.0, 1.0)); });
  test::expect_error(ErrorKind::ZeroMeanRisk, [] { nis(one(0.0, 1.0, 0.0, 1.0)); });
  auto bad_alpha = one(1.0, 1.0, 0.0, 2.0);
  bad_alpha.alpha = 1.0;
  test::expect_error(ErrorKind::InvalidAlpha, [&] { nis(bad_alpha); });
  bad_alpha.alpha = 0.0;
  test::expect_error(ErrorKind::InvalidAlpha, [&] { nis(bad_alpha); });
  test::expect_error(ErrorKind::MisalignedScores, [] { nis(one(1.0, 1.0, 2.0, 1.0)); });
  test::expect_error(ErrorKind::MisalignedScores, [] { nrmse(ScoredForecast{}); });
  ScoredForecast ragged{{1.0, 2.0}, {1.0}, {0.0, 0.0}, {2.0, 2.0}, 0.95};
  test::expect_error(ErrorKind::MisalignedScores, [&] { nrmse(ragged); });
}

TEST(BestModel, Ordering) {
  const std::vector<double> obs{1.0, 2.0};
  std::vector<MethodScore> s{{"gamlss", obs, 0.5, 2.27}, {"rf", obs, 0.1, 3.0}};
  EXPECT_EQ(best_model(s).method, "gamlss");
  s = {{"gamlss", obs, 0.2, 3.0}, {"rf", obs, 0.3, 3.0}};
  EXPECT_EQ(best_model(s).method, "gamlss");
  s = {{"rf", obs, 0.2, 3.0}, {"gamlss", obs, 0.2, 3.0}};
  EXPECT_EQ(best_model(s).method, "gamlss");
  s = {{"rf", obs, 0.2, 1.0}};
  EXPECT_EQ(best_model(s).method, "rf");
}

TEST(BestModel, Errors) {
  std::vector<MethodScore> none;
  test::expect_error(ErrorKind::MisalignedScores, [&] { best_model(none); });
  std::vector<MethodScore> s{{"gamlss", {1.0, 2.0}, 0.5, 2.0}, {"rf", {1.0, 2.5}, 0.1, 3.0}};
  test::expect_error(ErrorKind::MisalignedScores, [&] { best_model(s); });
}

TEST(ScoreMethod, CarriesBothMetrics) {
  const auto s = one(2.0, 1.0, 0.5, 3.0);
  const auto m = score_method("gamlss", s);
  EXPECT_EQ(m.method, "gamlss");
  EXPECT_EQ(m.nrmse, nrmse(s));
  EXPECT_EQ(m.nis, nis(s));
  EXPECT_EQ(m.observed, s.observed);
}

}  // namespace
}  // namespace lagcast
