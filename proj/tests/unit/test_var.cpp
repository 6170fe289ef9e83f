#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lagcast/random.hpp"
#include "lagcast/var.hpp"
#include "test_support.hpp"

namespace lagcast {
namespace {

const MonthIndex kStart{2000, 1};

// Simulates y_t = sum_i A_i y_{t-i} + e_t with e ~ N(0, I * scale^2), after a burn-in.
Eigen::MatrixXd simulate_var(const std::vector<Eigen::MatrixXd>& a, int t, double scale, std::uint64_t seed) {
  const auto k = a.front().rows();
  const int p = static_cast<int>(a.size());
  const int burn = 200;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(t + burn, k);
  for (int r = p; r < t + burn; ++r) {
    Eigen::VectorXd v(k);
    for (Eigen::Index j = 0; j < k; ++j) v(j) = normal(rng);
    for (int i = 0; i < p; ++i) v += a[static_cast<std::size_t>(i)] * y.row(r - 1 - i).transpose();
    y.row(r) = v.transpose();
  }
  return y.bottomRows(t);
}

// Plain least squares through the normal equations, regressors
// [1, t, dummies, lags], rows t >= first.
struct OracleFit {
  Eigen::MatrixXd coef;
  Eigen::MatrixXd sigma;
};

OracleFit oracle_ols(const Eigen::MatrixXd& y, int p, int first) {
  const auto k = y.cols();
  const auto n = y.rows() - first;
  const auto m = 13 + k * p;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto t = r + first;
    x(r, 0) = 1.0;
    x(r, 1) = static_cast<double>(t + 1);
    const int month = static_cast<int>(t % 12) + 1;
    if (month >= 2) x(r, month) = 1.0;
    for (int lag = 1; lag <= p; ++lag) x.block(r, 13 + (lag - 1) * k, 1, k) = y.row(t - lag);
  }
  const Eigen::MatrixXd yy = y.bottomRows(n);
  OracleFit out;
  out.coef = (x.transpose() * x).ldlt().solve(x.transpose() * yy);
  const Eigen::MatrixXd e = yy - x * out.coef;
  out.sigma = e.transpose() * e / static_cast<double>(n);
  return out;
}

VarModel ar1(double a, double sigma2) {
  VarModel m;
  m.p = 1;
  m.k = 1;
  m.a = {Eigen::MatrixXd::Constant(1, 1, a)};
  m.intercept = Eigen::VectorXd::Zero(1);
  m.trend = Eigen::VectorXd::Zero(1);
  m.seasonal = Eigen::MatrixXd::Zero(1, 11);
  m.sigma = Eigen::MatrixXd::Constant(1, 1, sigma2);
  m.origin = kStart;
  return m;
}

TEST(FitVar, Ar1Recovery) {
  const auto y = simulate_var({Eigen::MatrixXd::Constant(1, 1, 0.5)}, 5000, 1.0, 1);
  VarSpec plain{false, false, false};
  const auto m = fit_var(y, kStart, 1, plain);
  EXPECT_NEAR(m.a[0](0, 0), 0.5, 0.03);
  EXPECT_EQ(m.t_eff, 4999);
  EXPECT_NEAR(m.sigma(0, 0), 1.0, 0.05);
}

TEST(FitVar, BivariateRecovery) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.1, 0.0, 0.3;
  const auto y = simulate_var({a}, 5000, 1.0, 2);
  const auto m = fit_var(y, kStart, 1);
  EXPECT_LT((m.a[0] - a).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((m.sigma - m.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(m.stable());
}

TEST(FitVar, ExactTrend) {
  Eigen::MatrixXd y(60, 1);
  for (int t = 0; t < 60; ++t) y(t, 0) = t + 1;
  const auto m = fit_var(y, kStart, 1);
  EXPECT_NEAR(m.trend(0), 1.0, 1e-9);
  EXPECT_NEAR(m.a[0](0, 0), 0.0, 1e-9);
  EXPECT_NEAR(m.sigma(0, 0), 0.0, 1e-12);
  EXPECT_FALSE(m.aliased.empty());
  VarSpec strict;
  strict.allow_aliased = false;
  const auto msg = test::expect_error(ErrorKind::SingularRegressors, [&] { fit_var(y, kStart, 1, strict); });
  EXPECT_NE(msg.find("y1.l1"), std::string::npos) << msg;
}

TEST(FitVar, MatchesNormalEquationOracle) {
  Eigen::MatrixXd a1(3, 3);
  a1 << 0.4, 0.1, 0.0, -0.1, 0.3, 0.1, 0.0, 0.2, 0.2;
  Eigen::MatrixXd a2 = 0.2 * Eigen::MatrixXd::Identity(3, 3);
  const auto y = simulate_var({a1, a2}, 300, 1.0, 3);
  const auto m = fit_var(y, kStart, 2);
  const auto o = oracle_ols(y, 2, 2);
  for (int lag = 0; lag < 2; ++lag) {
    // oracle column j of equation i sits at row 13 + lag * k + j
    EXPECT_LT((m.a[static_cast<std::size_t>(lag)] - o.coef.block(13 + lag * 3, 0, 3, 3).transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_LT((m.intercept - o.coef.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((m.trend - o.coef.row(1).transpose()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((m.sigma - o.sigma).cwiseAbs().maxCoeff(), 1e-9);

  // Residuals orthogonal to the regressors.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m.t_eff, 13 + 6);
  for (int r = 0; r < m.t_eff; ++r) {
    const int t = r + 2;
    x(r, 0) = 1.0;
    x(r, 1) = t + 1;
    if (t % 12 >= 1) x(r, 1 + t % 12) = 1.0;
    x.block(r, 13, 1, 3) = y.row(t - 1);
    x.block(r, 16, 1, 3) = y.row(t - 2);
  }
  EXPECT_LT((x.transpose() * m.residuals).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FitVar, Errors) {
  const Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(10, 2);
  test::expect_error(ErrorKind::InsufficientData, [&] { fit_var(tiny, kStart, 1); });
  test::expect_error(ErrorKind::InsufficientData, [&] { fit_var(Eigen::MatrixXd::Random(100, 2), kStart, 0); });
  Eigen::MatrixXd nan = Eigen::MatrixXd::Random(100, 2);
  nan(5, 1) = NAN;
  test::expect_error(ErrorKind::InsufficientData, [&] { fit_var(nan, kStart, 1); });
}

TEST(SelectLag, WhiteNoisePicksOne) {
  Rng rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd y(252, 5);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = normal(rng);
  const auto sel = select_lag_bic(y, kStart, 6);
  EXPECT_EQ(sel.p, 1);
  EXPECT_EQ(sel.bic.size(), 6u);
  const auto m = fit_var(y, kStart, sel.p);
  EXPECT_LT(m.a[0].cwiseAbs().maxCoeff(), 0.3);
}

TEST(SelectLag, SingleCandidate) {
  const auto y = simulate_var({Eigen::MatrixXd::Constant(2, 2, 0.2)}, 100, 1.0, 5);
  const auto sel = select_lag_bic(y, kStart, 1);
  EXPECT_EQ(sel.p, 1);
  EXPECT_EQ(sel.bic.size(), 1u);
}

TEST(SelectLag, BicMatchesOracle) {
  Eigen::MatrixXd a1 = 0.3 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd a2 = -0.4 * Eigen::MatrixXd::Identity(2, 2);
  const auto y = simulate_var({a1, a2}, 252, 1.0, 6);
  const auto sel = select_lag_bic(y, kStart, 4);
  for (int p = 1; p <= 4; ++p) {
    const auto o = oracle_ols(y, p, 4);
    const double t_eff = 252 - 4;
    const double bic = std::log(o.sigma.determinant()) + std::log(t_eff) / t_eff * (13.0 + 2.0 * p) * 2.0;
    EXPECT_NEAR(sel.bic[static_cast<std::size_t>(p - 1)], bic, 1e-9) << p;
  }
  EXPECT_EQ(sel.p, 2);
}

TEST(SelectLag, CapsOrderBySampleSize) {
  const auto y = simulate_var({Eigen::MatrixXd::Constant(5, 5, 0.05)}, 60, 1.0, 7);
  const auto sel = select_lag_bic(y, kStart, 13);
  EXPECT_LT(sel.p_max, 13);
  EXPECT_GE(sel.p_max, 1);
  EXPECT_EQ(sel.bic.size(), static_cast<std::size_t>(sel.p_max));
}

TEST(ForecastVar, GeometricDecay) {
  const auto m = ar1(0.5, 1.0);
  const auto f = forecast_var(m, {Eigen::MatrixXd::Constant(1, 1, 2.0), kStart}, 2);
  EXPECT_DOUBLE_EQ(f.mean(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.mean(1, 0), 0.5);
  EXPECT_EQ(f.months[0], kStart.plus(1));
  EXPECT_DOUBLE_EQ(f.covariance[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.covariance[1](0, 0), 1.25);
  EXPECT_DOUBLE_EQ(f.lower(0, 0), 1.0 - 1.959964);
  EXPECT_DOUBLE_EQ(f.upper(0, 0), 1.0 + 1.959964);
}

TEST(ForecastVar, VarianceLimit) {
  const auto f = forecast_var(ar1(0.5, 1.0), {Eigen::MatrixXd::Zero(1, 1), kStart}, 60);
  EXPECT_NEAR(f.covariance.back()(0, 0), 4.0 / 3.0, 1e-12);
  for (int s = 1; s < 60; ++s) {
    EXPECT_GE(f.covariance[static_cast<std::size_t>(s)](0, 0), f.covariance[static_cast<std::size_t>(s - 1)](0, 0));
  }
}

TEST(ForecastVar, OneStepCovarianceIsSigmaAndStepsArePsd) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.1, 0.0, 0.3;
  const auto y = simulate_var({a}, 300, 1.0, 8);
  const auto m = fit_var(y, kStart, 1);
  const auto f = forecast_var(m, {y.bottomRows(1), kStart.plus(299)}, 12);
  EXPECT_EQ(f.covariance[0], m.sigma);
  for (int s = 0; s < 12; ++s) {
    const auto& c = f.covariance[static_cast<std::size_t>(s)];
    EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diff(c - f.covariance[0]);
    EXPECT_GT(diff.eigenvalues().minCoeff(), -1e-10);
    for (int j = 0; j < 2; ++j) {
      EXPECT_LE(f.lower(s, j), f.mean(s, j));
      EXPECT_LE(f.mean(s, j), f.upper(s, j));
    }
  }
}

TEST(ForecastVar, NoiselessTrendSeasonalReproduced) {
  const double season[12] = {0.0, 1.5, -0.3, 2.0, 0.7, -1.1, 0.4, 0.9, -0.6, 1.2, -2.0, 0.25};
  auto value = [&](int t, int j) { return 3.0 * j + 0.5 + 0.02 * (j + 1) * (t + 1) + season[(t + 5 * j) % 12]; };
  Eigen::MatrixXd y(120, 2);
  for (int t = 0; t < 120; ++t) {
    for (int j = 0; j < 2; ++j) y(t, j) = value(t, j);
  }
  const auto sel = select_lag_bic(y, kStart, 3);
  const auto m = fit_var(y, kStart, sel.p);
  const auto f = forecast_var(m, {y.bottomRows(m.p), kStart.plus(119)}, 36);
  for (int s = 0; s < 36; ++s) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(f.mean(s, j), value(120 + s, j), 1e-8) << s;
  }
}

TEST(ForecastVar, Errors) {
  const auto m = ar1(0.5, 1.0);
  test::expect_error(ErrorKind::HorizonZero, [&] { forecast_var(m, {Eigen::MatrixXd::Zero(1, 1), kStart}, 0); });
  test::expect_error(ErrorKind::InsufficientData, [&] { forecast_var(m, {Eigen::MatrixXd::Zero(0, 1), kStart}, 1); });
}

TEST(FitVar, ParametricBootstrapRecovery) {
  Eigen::MatrixXd a(2, 2);
  a << 0.6, -0.2, 0.1, 0.4;
  const auto y = simulate_var({a}, 5000, 1.0, 9);
  const auto m = fit_var(y, kStart, 1, {false, false, true});
  const auto y2 = simulate_var(m.a, 5000, 1.0, 10);
  const auto m2 = fit_var(y2, kStart, 1, {false, false, true});
  EXPECT_LT((m2.a[0] - m.a[0]).cwiseAbs().maxCoeff(), 0.05);
}

}  // namespace
}  // namespace lagcast
