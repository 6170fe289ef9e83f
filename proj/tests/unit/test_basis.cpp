#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lagcast/basis.hpp"
#include "lagcast/numeric.hpp"
#include "test_support.hpp"

namespace lagcast {
namespace {

// Pointwise recursive Cox-de Boor on a clamped knot vector. Degree-0 pieces
// are half-open [t_i, t_{i+1}); the right boundary belongs to the last
// non-empty piece.
double cox_de_boor(int i, int d, double x, const std::vector<double>& t) {
  if (d == 0) {
    const double hi = t.back();
    if (x == hi) {
      // last non-empty interval
      std::size_t last = t.size() - 2;
      while (t[last] == t[last + 1]) --last;
      return static_cast<std::size_t>(i) == last ? 1.0 : 0.0;
    }
    return (t[static_cast<std::size_t>(i)] <= x && x < t[static_cast<std::size_t>(i) + 1]) ? 1.0 : 0.0;
  }
  const auto ui = static_cast<std::size_t>(i);
  const auto ud = static_cast<std::size_t>(d);
  double left = 0.0;
  double right = 0.0;
  const double dl = t[ui + ud] - t[ui];
  const double dr = t[ui + ud + 1] - t[ui + 1];
  if (dl > 0.0) left = (x - t[ui]) / dl * cox_de_boor(i, d - 1, x, t);
  if (dr > 0.0) right = (t[ui + ud + 1] - x) / dr * cox_de_boor(i + 1, d - 1, x, t);
  return left + right;
}

std::vector<double> clamped_knots(int degree, double lo, double hi, const std::vector<double>& interior) {
  std::vector<double> t(static_cast<std::size_t>(degree + 1), lo);
  t.insert(t.end(), interior.begin(), interior.end());
  t.insert(t.end(), static_cast<std::size_t>(degree + 1), hi);
  return t;
}

double oracle_basis(int j, int degree, double lo, double hi, const std::vector<double>& interior, double x) {
  return cox_de_boor(j, degree, x, clamped_knots(degree, lo, hi, interior));
}

double oracle_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

TEST(BSpline, HatFunctionPeak) {
  const std::vector<double> x{0.5};
  const std::vector<double> knots{0.5};
  const auto b = bspline_basis(x, BasisSpec::bspline(1, 3), {0.0, 1.0}, knots);
  ASSERT_EQ(b.cols(), 3);
  EXPECT_NEAR(b(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(b(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(b(0, 2), 0.0, 1e-15);
}

TEST(BSpline, PartitionOfUnityAtThousandPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 5.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = u(rng);
  x[0] = -3.0;
  x[1] = 5.0;
  for (int degree : {1, 2, 3, 4}) {
    for (int df : {degree + 1, degree + 2, degree + 5}) {
      std::vector<double> knots;
      const int count = df - degree - 1;
      for (int k = 1; k <= count; ++k) knots.push_back(-3.0 + 8.0 * k / (count + 1) + 0.01 * k);
      const auto b = bspline_basis(x, BasisSpec::bspline(degree, df), {-3.0, 5.0}, knots);
      for (Eigen::Index i = 0; i < b.rows(); ++i) {
        EXPECT_NEAR(b.row(i).sum(), 1.0, 1e-12);
        EXPECT_GE(b.row(i).minCoeff(), -1e-15);
      }
    }
  }
}

TEST(BSpline, MatchesRecursiveOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int degree = 1 + rep % 4;
    const int df = degree + 1 + rep % 3;
    std::vector<double> knots;
    for (int k = 0; k < df - degree - 1; ++k) knots.push_back(u(rng));
    std::sort(knots.begin(), knots.end());
    std::vector<double> x(50);
    for (auto& v : x) v = u(rng);
    x[0] = 0.0;
    x[1] = 10.0;
    if (!knots.empty()) x[2] = knots[0];
    const auto b = bspline_basis(x, BasisSpec::bspline(degree, df), {0.0, 10.0}, knots);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int j = 0; j < df; ++j) {
        EXPECT_NEAR(b(static_cast<Eigen::Index>(i), j), oracle_basis(j, degree, 0.0, 10.0, knots, x[i]), 1e-10)
            << "degree " << degree << " df " << df << " x " << x[i] << " j " << j;
      }
    }
  }
}

TEST(BSpline, Errors) {
  const std::vector<double> x{0.5};
  test::expect_error(ErrorKind::DegenerateBoundary, [&] { bspline_basis(x, BasisSpec::bspline(3, 4), {1.0, 1.0}, {}); });
  const std::vector<double> outside{1.5};
  test::expect_error(ErrorKind::KnotsOutOfRange,
                     [&] { bspline_basis(x, BasisSpec::bspline(3, 5), {0.0, 1.0}, outside); });
  const std::vector<double> unsorted{0.6, 0.4};
  test::expect_error(ErrorKind::KnotsOutOfRange,
                     [&] { bspline_basis(x, BasisSpec::bspline(1, 4), {0.0, 1.0}, unsorted); });
  test::expect_error(ErrorKind::InvalidSpec, [&] { BasisSpec::bspline(3, 3).validate(); });
  test::expect_error(ErrorKind::InvalidSpec, [&] { BasisSpec::parse("spline"); });
}

TEST(BasisSpec, TextRoundTrip) {
  for (const auto& s : {BasisSpec::linear(), BasisSpec::bspline(3, 4), BasisSpec::bspline(2, 7)}) {
    EXPECT_EQ(BasisSpec::parse(s.to_string()), s);
  }
}

TEST(LinearBasis, IsIdentity) {
  const std::vector<double> a{1.0, 2.0};
  const auto m = linear_basis(a);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 1);
  EXPECT_EQ(m(0, 0), 1.0);
  EXPECT_EQ(m(1, 0), 2.0);
  const std::vector<double> z{0.0};
  EXPECT_EQ(linear_basis(z)(0, 0), 0.0);
  std::vector<double> long_x(252);
  for (std::size_t i = 0; i < long_x.size(); ++i) long_x[i] = 0.1 * static_cast<double>(i);
  const auto l = linear_basis(long_x);
  EXPECT_EQ(l.rows(), 252);
  for (std::size_t i = 0; i < long_x.size(); ++i) EXPECT_EQ(l(static_cast<Eigen::Index>(i), 0), long_x[i]);
}

TEST(QuantileKnots, AreType7Quantiles) {
  std::vector<double> x(97);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : x) v = n(rng);
  const auto k = quantile_knots(x, 3);
  ASSERT_EQ(k.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(k[static_cast<std::size_t>(i)], oracle_quantile(x, (i + 1) / 4.0), 1e-14);
}

TEST(CrossBasis, DegenerateLagIsTheSeries) {
  const std::vector<double> x{3.0, -1.0, 2.5, 7.0};
  const auto cb = cross_basis(x, 0, BasisSpec::linear(), BasisSpec::linear());
  ASSERT_EQ(cb.matrix.cols(), 1);
  EXPECT_EQ(cb.valid_from, 0);
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_EQ(cb.matrix(static_cast<Eigen::Index>(t), 0), x[t]);
}

TEST(CrossBasis, ColumnCountIsProductOfDimensions) {
  std::vector<double> x(100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * static_cast<double>(i));
  const auto cb = cross_basis(x, 18, BasisSpec::bspline(3, 4), BasisSpec::linear());
  EXPECT_EQ(cb.matrix.cols(), 8);
  EXPECT_EQ(cb.var_dim, 4);
  EXPECT_EQ(cb.lag_dim, 2);
  EXPECT_EQ(cb.valid_from, 18);
  for (const auto& vs : {BasisSpec::linear(), BasisSpec::bspline(2, 5)}) {
    for (const auto& ls : {BasisSpec::linear(), BasisSpec::bspline(2, 4), BasisSpec::bspline(3, 6)}) {
      const auto c = cross_basis(x, 12, vs, ls);
      const int v = vs.kind == BasisKind::linear ? 1 : vs.df;
      const int l = ls.kind == BasisKind::linear ? 2 : ls.df;
      EXPECT_EQ(c.matrix.cols(), v * l);
    }
  }
  test::expect_error(ErrorKind::LagTooLarge, [&] { cross_basis(std::span(x).first(10), 10, BasisSpec::linear(), BasisSpec::linear()); });
}

// Independent naive double sum: sum_l B_j(x[t-l]) C_k(l) with both bases
// evaluated pointwise by the recursive oracle.
Eigen::MatrixXd naive_cross_basis(const std::vector<double>& x, int max_lag, const BasisSpec& vs, const BasisSpec& ls) {
  const int v = vs.kind == BasisKind::linear ? 1 : vs.df;
  const int l = ls.kind == BasisKind::linear ? (max_lag == 0 ? 1 : 2) : ls.df;
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  std::vector<double> vknots;
  for (int k = 1; k <= vs.df - vs.degree - 1; ++k) vknots.push_back(oracle_quantile(x, static_cast<double>(k) / (vs.df - vs.degree)));
  std::vector<double> lknots;
  for (int k = 1; k <= ls.df - ls.degree - 1; ++k) lknots.push_back(max_lag * static_cast<double>(k) / (ls.df - ls.degree));
  auto var_b = [&](int j, double value) {
    return vs.kind == BasisKind::linear ? value : oracle_basis(j, vs.degree, lo, hi, vknots, value);
  };
  auto lag_b = [&](int k, int lag) {
    if (ls.kind == BasisKind::linear) return k == 0 ? 1.0 : static_cast<double>(lag);
    return oracle_basis(k, ls.degree, 0.0, static_cast<double>(max_lag), lknots, static_cast<double>(lag));
  };
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, v * l, std::nan(""));
  for (Eigen::Index t = max_lag; t < n; ++t) {
    for (int j = 0; j < v; ++j) {
      for (int k = 0; k < l; ++k) {
        double s = 0.0;
        for (int lag = 0; lag <= max_lag; ++lag) s += var_b(j, x[static_cast<std::size_t>(t - lag)]) * lag_b(k, lag);
        out(t, j * l + k) = s;
      }
    }
  }
  return out;
}

TEST(CrossBasis, MatchesNaiveDoubleSumOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::vector<BasisSpec> specs{BasisSpec::linear(), BasisSpec::bspline(3, 4), BasisSpec::bspline(2, 5),
                                     BasisSpec::bspline(1, 3)};
  for (int rep = 0; rep < 30; ++rep) {
    const auto& vs = specs[static_cast<std::size_t>(rep) % specs.size()];
    const auto& ls = specs[static_cast<std::size_t>(rep / 4) % specs.size()];
    const int max_lag = 3 + rep % 16;
    std::vector<double> x(60 + rep);
    for (auto& v : x) v = 10.0 + 3.0 * n(rng);
    const auto cb = cross_basis(x, max_lag, vs, ls);
    const auto oracle = naive_cross_basis(x, max_lag, vs, ls);
    ASSERT_EQ(cb.matrix.cols(), oracle.cols());
    for (Eigen::Index t = 0; t < cb.matrix.rows(); ++t) {
      for (Eigen::Index c = 0; c < cb.matrix.cols(); ++c) {
        if (t < max_lag) {
          EXPECT_TRUE(std::isnan(cb.matrix(t, c)));
        } else {
          EXPECT_NEAR(cb.matrix(t, c), oracle(t, c), 1e-10);
        }
      }
    }
  }
}

TEST(CrossBasis, LinearLinearRecoversDistributedLagWeights) {
  // y_t = sum_l w_l x_{t-l} with w_l = a + b l lies in the span of the two
  // cross-basis columns: y = a * col0 + b * col1 exactly.
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  const int L = 18;
  std::vector<double> x(300);
  for (auto& v : x) v = n(rng);
  const double a = 0.4;
  const double b = -0.02;
  const auto cb = cross_basis(x, L, BasisSpec::linear(), BasisSpec::linear());
  const Eigen::Index rows = static_cast<Eigen::Index>(x.size()) - L;
  Eigen::MatrixXd design = cb.matrix.bottomRows(rows);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int l = 0; l <= L; ++l) s += (a + b * l) * x[static_cast<std::size_t>(r + L - l)];
    y(r) = s;
  }
  const Eigen::VectorXd coef = least_squares(design, y);
  EXPECT_NEAR(coef(0), a, 1e-10);
  EXPECT_NEAR(coef(1), b, 1e-10);
  EXPECT_LT((design * coef - y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CrossBasisBuilder, RowMatchesTransformAndClampsOutOfRange) {
  std::vector<double> train(120);
  for (std::size_t i = 0; i < train.size(); ++i) train[i] = std::sin(0.4 * static_cast<double>(i)) * 5.0;
  const auto builder = CrossBasisBuilder::fit(train, 12, BasisSpec::bspline(3, 5), BasisSpec::linear());
  const auto full = builder.transform(train);
  for (std::size_t t = 12; t < train.size(); ++t) {
    const Eigen::RowVectorXd r = builder.row(train, t);
    for (Eigen::Index c = 0; c < r.size(); ++c) EXPECT_EQ(r(c), full.matrix(static_cast<Eigen::Index>(t), c));
  }
  std::vector<double> extended = train;
  extended.push_back(50.0);  // far above the training maximum
  std::size_t clamped = 0;
  const Eigen::RowVectorXd r = builder.row(extended, extended.size() - 1, &clamped);
  EXPECT_EQ(clamped, 1u);
  EXPECT_TRUE(r.allFinite());
  std::vector<double> at_max = train;
  at_max.push_back(*std::max_element(train.begin(), train.end()));
  const Eigen::RowVectorXd r2 = builder.row(at_max, at_max.size() - 1);
  for (Eigen::Index c = 0; c < r.size(); ++c) EXPECT_NEAR(r(c), r2(c), 1e-12);
  EXPECT_EQ(builder.column_names("precip").front(), "precip.v1.l1");
}

}  // namespace
}  // namespace lagcast
