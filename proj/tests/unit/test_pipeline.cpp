#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lagcast/numeric.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/simulate.hpp"
#include "test_support.hpp"

namespace lagcast {
namespace {

// 252 months from 2000-01; train through 2020-09, forecast 2020-10..12.
CantonSpec small_spec() {
  CantonSpec spec;
  spec.train_start = MonthIndex{2000, 1};
  spec.train_end = MonthIndex{2020, 9};
  spec.horizon = 3;
  spec.bootstrap_replicates = 20;
  spec.forest.n_trees = 50;
  spec.seed = 5;
  return spec;
}

SimulatedPanel small_panel(std::uint64_t seed, int cantons = 2) {
  SimConfig cfg;
  cfg.cantons = cantons;
  return simulate_panel(cfg, seed);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(CantonSpec, Defaults) {
  const CantonSpec spec;
  EXPECT_EQ(spec.max_lag, 18);
  EXPECT_EQ(spec.bootstrap_replicates, 100);
  EXPECT_EQ(spec.block_length, 6);
  EXPECT_EQ(spec.horizon, 3);
  EXPECT_EQ(spec.train_length(), 252);
  EXPECT_EQ(spec.plans[0].var, BasisSpec::bspline(3, 4));
  EXPECT_EQ(spec.plans[1].var, BasisSpec::bspline(3, 4));
  for (std::size_t j = 2; j < kClimateCount; ++j) EXPECT_EQ(spec.plans[j].var, BasisSpec::linear());
  for (const auto& p : spec.plans) EXPECT_EQ(p.lag, BasisSpec::linear());
  EXPECT_EQ(parse_method("rf"), Method::rf);
  EXPECT_EQ(to_string(Method::gamlss), "gamlss");
  test::expect_error(ErrorKind::InvalidSpec, [] { parse_method("svm"); });
}

TEST(FitCanton, SharedDesignForBothMethods) {
  const auto sim = small_panel(1);
  const auto spec = small_spec();
  const auto fit = fit_canton(sim.panel, "C01", spec);
  EXPECT_EQ(fit.design.matrix.rows(), 249 - 19);
  ASSERT_EQ(fit.methods.size(), 2u);
  const auto& g = fit.method(Method::gamlss);
  const auto& r = fit.method(Method::rf);
  EXPECT_EQ(g.zaga->names, fit.design.matrix.names);
  EXPECT_EQ(r.forest->input_names, fit.design.matrix.names);
  EXPECT_EQ(g.fitted.size(), fit.design.y.size());
  EXPECT_EQ(r.fitted.size(), fit.design.y.size());
  EXPECT_EQ(fit.layout.names(), fit.design.matrix.names);
  EXPECT_EQ(fit.risk.months.back(), spec.train_end);
  EXPECT_GE(g.fitted.minCoeff(), 0.0);
  EXPECT_GE(r.fitted.minCoeff(), 0.0);
}

TEST(FitCanton, TrainWindowTooShort) {
  const auto sim = small_panel(1);
  auto spec = small_spec();
  spec.train_start = MonthIndex{2000, 1};
  spec.train_end = spec.train_start.plus(30);  // 31 months
  const auto msg = test::expect_error(ErrorKind::ConstraintViolation, [&] { fit_canton(sim.panel, "C01", spec); });
  EXPECT_NE(msg.find("31"), std::string::npos) << msg;
  spec.train_end = spec.train_start.plus(31);  // 32 months is the minimum
  EXPECT_NO_THROW(spec.validate());
}

TEST(FitCanton, RandomForestBeatsInterceptInSample) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto sim = small_panel(seed);
    auto spec = small_spec();
    spec.methods = {Method::rf};
    const auto fit = fit_canton(sim.panel, "C02", spec);
    const Eigen::VectorXd& y = fit.design.y;
    const std::vector<double> obs(y.data(), y.data() + y.size());
    const auto& fitted = fit.method(Method::rf).fitted;
    const std::vector<double> rf_point(fitted.data(), fitted.data() + fitted.size());
    const std::vector<double> mean_point(obs.size(), y.mean());
    const ScoredForecast rf{obs, rf_point, rf_point, rf_point, 0.95};
    const ScoredForecast flat{obs, mean_point, mean_point, mean_point, 0.95};
    EXPECT_LE(nrmse(rf), nrmse(flat)) << seed;
  }
}

TEST(FitCanton, ReadsOnlyTrainingWindow) {
  auto sim = small_panel(2);
  const auto spec = small_spec();
  const auto before = run_forecasts(sim.panel, spec);
  // Scramble everything after the training window.
  for (auto& [id, data] : sim.panel.cantons) {
    for (std::size_t t = 249; t < 252; ++t) {
      data.series.cases[t] = 12345;
      data.climate[t].precip = 9999.0;
      data.climate[t].lst = -5.0;
    }
  }
  const auto after = run_forecasts(sim.panel, spec);
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t c = 0; c < before.size(); ++c) {
    for (std::size_t m = 0; m < before[c].forecasts.size(); ++m) {
      EXPECT_EQ(before[c].forecasts[m].point, after[c].forecasts[m].point);
      EXPECT_EQ(before[c].forecasts[m].lower, after[c].forecasts[m].lower);
      EXPECT_EQ(before[c].forecasts[m].upper, after[c].forecasts[m].upper);
    }
  }
}

TEST(ForecastRecursive, ConstantForestForecastsConstant) {
  const auto sim = small_panel(3);
  auto spec = small_spec();
  spec.methods = {Method::rf};
  const auto fit = fit_canton(sim.panel, "C01", spec);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(fit.design.y.size(), 2.5);
  const auto rf = refit_method(fit, Method::rf, c, spec, 3);
  const Eigen::MatrixXd last = fit.climate.bottomRows(1);
  EXPECT_EQ(forecast_recursive(fit, rf, last, 1, spec), std::vector<double>{2.5});

  // Raw forest prediction of -0.1 is clamped to zero.
  const auto neg = refit_method(fit, Method::rf, Eigen::VectorXd::Constant(fit.design.y.size(), -0.1), spec, 3);
  EXPECT_NEAR(predict_forest_row(*neg.forest, fit.design.matrix.x.row(0)), -0.1, 1e-15);
  const Eigen::MatrixXd path = fit.climate.bottomRows(3);
  EXPECT_EQ(forecast_recursive(fit, neg, path, 3, spec), (std::vector<double>{0.0, 0.0, 0.0}));
  test::expect_error(ErrorKind::HorizonExceedsVar, [&] { forecast_recursive(fit, rf, last, 2, spec); });
}

TEST(ForecastRecursive, OneStepEqualsDirectPrediction) {
  const auto sim = small_panel(3);
  auto spec = small_spec();
  spec.methods = {Method::gamlss};
  const auto fit = fit_canton(sim.panel, "C01", spec);
  const auto climate = forecast_climate(fit, spec);
  const auto& g = fit.method(Method::gamlss);
  const auto path = forecast_recursive(fit, g, climate.forecast.mean, 1, spec);

  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t j = 0; j < kClimateCount; ++j) {
    std::vector<double> x = column(fit.climate, static_cast<Eigen::Index>(j));
    x.push_back(climate.forecast.mean(0, static_cast<Eigen::Index>(j)));
    rows.push_back(fit.builders[j].row(x, x.size() - 1));
  }
  const Eigen::RowVectorXd row = fit.layout.row(fit.risk.rr.back(), rows, spec.train_end.plus(1));
  const double direct = (1.0 - g.zaga->nu_hat) * std::exp(row.dot(g.zaga->beta_mu));
  EXPECT_NEAR(path[0], direct, 1e-12 * direct);
  EXPECT_GE(path[0], 0.0);
}

TEST(ForecastRecursive, TracksLaggedPrecipitationSignal) {
  std::vector<double> forecast;
  std::vector<double> truth;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig cfg;
    cfg.cantons = 2;
    cfg.climate_effect = {1.0, 0.0, 0.0, 0.0, 0.0};
    const auto sim = simulate_panel(cfg, 100 + seed);
    auto spec = small_spec();
    spec.methods = {Method::gamlss};
    spec.bootstrap_replicates = 0;
    for (const auto& run : run_forecasts(sim.panel, spec)) {
      const auto& f = run.forecasts.front();
      const auto& t = *std::find_if(sim.truth.begin(), sim.truth.end(),
                                    [&](const CantonTruth& c) { return c.canton_id == run.fit.canton_id; });
      for (int s = 0; s < 3; ++s) {
        forecast.push_back(f.point[static_cast<std::size_t>(s)]);
        truth.push_back((1.0 - cfg.nu) * t.mu[static_cast<std::size_t>(249 + s)]);
      }
    }
  }
  EXPECT_GT(correlation(forecast, truth), 0.7);
}

TEST(Bootstrap, ZeroResidualsGiveDegenerateIntervals) {
  const auto sim = small_panel(3);
  auto spec = small_spec();
  spec.methods = {Method::rf};
  auto fit = fit_canton(sim.panel, "C01", spec);
  // A constant response fit exactly by a constant forest leaves nothing to resample.
  fit.design.y.setConstant(1.5);
  fit.methods = {refit_method(fit, Method::rf, fit.design.y, spec, 11)};
  ASSERT_EQ((fit.design.y - fit.methods[0].residual_base).cwiseAbs().maxCoeff(), 0.0);
  const auto climate = forecast_climate(fit, spec);
  const auto r = forecast_method(fit, fit.methods[0], climate, spec);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(r.point[s], 1.5);
    EXPECT_EQ(r.lower[s], 1.5);
    EXPECT_EQ(r.upper[s], 1.5);
  }
}

TEST(Bootstrap, QuantilesOfReplicatePaths) {
  const auto sim = small_panel(4);
  auto spec = small_spec();
  spec.methods = {Method::gamlss};
  spec.bootstrap_replicates = 40;
  const auto fit = fit_canton(sim.panel, "C01", spec);
  const auto climate = forecast_climate(fit, spec);
  const auto& g = fit.method(Method::gamlss);
  const auto boot = bootstrap_intervals(fit, g, climate.forecast.mean, spec);
  ASSERT_EQ(boot.paths.rows(), 40);
  for (int s = 0; s < 3; ++s) {
    std::vector<double> v = column(boot.paths, s);
    const double lo = (1.0 - spec.alpha) / 2.0;
    EXPECT_EQ(boot.lower[static_cast<std::size_t>(s)], quantile_type7(v, lo));
    EXPECT_EQ(boot.upper[static_cast<std::size_t>(s)], quantile_type7(v, 1.0 - lo));
    const double median = quantile_type7(v, 0.5);
    EXPECT_LE(boot.lower[static_cast<std::size_t>(s)], median);
    EXPECT_GE(boot.upper[static_cast<std::size_t>(s)], median);
    EXPECT_GE(boot.lower[static_cast<std::size_t>(s)], 0.0);
  }
  // Same seed, same replicates.
  const auto again = bootstrap_intervals(fit, g, climate.forecast.mean, spec);
  EXPECT_EQ(again.paths, boot.paths);

  const auto r = forecast_method(fit, g, climate, spec);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_LE(r.lower[s], r.point[s]);
    EXPECT_LE(r.point[s], r.upper[s]);
  }
}

TEST(Bootstrap, TooFewResiduals) {
  const auto sim = small_panel(4);
  auto spec = small_spec();
  spec.methods = {Method::gamlss};
  const auto fit = fit_canton(sim.panel, "C01", spec);
  spec.block_length = 200;
  const auto climate = forecast_climate(fit, spec);
  test::expect_error(ErrorKind::TooFewResiduals,
                     [&] { bootstrap_intervals(fit, fit.method(Method::gamlss), climate.forecast.mean, spec); });
}

TEST(Persistence, CarriesLastValue) {
  RiskSeries r;
  r.canton_id = "K";
  for (int t = 0; t < 40; ++t) {
    r.months.push_back(MonthIndex{2000, 1}.plus(t));
    r.rr.push_back(1.0 + 0.1 * (t % 5));
  }
  const auto f = persistence_forecast(r, 3, 0.95);
  EXPECT_EQ(f.method, "persistence");
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(f.point[s], r.rr.back());
    EXPECT_LE(f.lower[s], f.point[s]);
    EXPECT_GE(f.upper[s], f.point[s]);
    EXPECT_GE(f.lower[s], 0.0);
    EXPECT_EQ(f.months[s], MonthIndex(2000, 1).plus(40 + static_cast<int>(s)));
  }
}

ForecastResult constant_forecast(const std::string& canton, const std::string& method, MonthIndex first, double v) {
  ForecastResult r;
  r.canton_id = canton;
  r.method = method;
  for (int s = 0; s < 3; ++s) {
    r.months.push_back(first.plus(s));
    r.point.push_back(v);
    r.lower.push_back(v * 0.5);
    r.upper.push_back(v * 1.5);
  }
  return r;
}

TEST(Evaluate, SingleAndTiedMethods) {
  const auto panel = test::toy_panel(2, 60);
  const MonthIndex first = MonthIndex{2000, 1}.plus(57);
  const std::vector<ForecastResult> one{constant_forecast("K1", "rf", first, 1.0)};
  const auto single = evaluate(one, panel, 0.95);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].best_model, "rf");
  EXPECT_TRUE(single[0].scorable);

  const std::vector<ForecastResult> tied{constant_forecast("K1", "rf", first, 1.0),
                                         constant_forecast("K1", "gamlss", first, 1.0)};
  const auto report = evaluate(tied, panel, 0.95);
  ASSERT_EQ(report[0].scores.size(), 2u);
  EXPECT_EQ(report[0].scores[0].nis, report[0].scores[1].nis);
  EXPECT_EQ(report[0].best_model, "gamlss");

  const std::vector<ForecastResult> beyond{constant_forecast("K1", "rf", MonthIndex{2000, 1}.plus(59), 1.0)};
  const auto msg = test::expect_error(ErrorKind::MissingObservations, [&] { evaluate(beyond, panel, 0.95); });
  EXPECT_NE(msg.find("2005-01"), std::string::npos) << msg;
  const std::vector<ForecastResult> unknown{constant_forecast("ZZ", "rf", first, 1.0)};
  test::expect_error(ErrorKind::MissingObservations, [&] { evaluate(unknown, panel, 0.95); });
}

TEST(Evaluate, ZeroMeanWindowIsUnscorable) {
  auto panel = test::toy_panel(2, 60);
  auto& k = panel.cantons.at("K0");
  for (std::size_t t = 57; t < 60; ++t) k.series.cases[t] = 0;
  const std::vector<ForecastResult> r{constant_forecast("K0", "rf", MonthIndex{2000, 1}.plus(57), 1.0)};
  const auto report = evaluate(r, panel, 0.95);
  EXPECT_FALSE(report[0].scorable);
  EXPECT_EQ(report[0].best_model, kNoBestModel);
  EXPECT_TRUE(std::isnan(report[0].scores[0].nis));
}

TEST(RunForecasts, ReproducibleAndOrdered) {
  const auto sim = small_panel(6, 3);
  auto spec = small_spec();
  spec.bootstrap_replicates = 10;
  spec.forest.n_trees = 20;
  const auto a = run_forecasts(sim.panel, spec);
  const auto b = run_forecasts(sim.panel, spec);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].fit.canton_id, "C01");
  EXPECT_EQ(a[2].fit.canton_id, "C03");
  for (std::size_t c = 0; c < a.size(); ++c) {
    ASSERT_EQ(a[c].forecasts.size(), 2u);
    for (std::size_t m = 0; m < 2; ++m) {
      EXPECT_EQ(a[c].forecasts[m].point, b[c].forecasts[m].point);
      EXPECT_EQ(a[c].forecasts[m].lower, b[c].forecasts[m].lower);
      EXPECT_EQ(a[c].forecasts[m].upper, b[c].forecasts[m].upper);
    }
  }
  std::vector<ForecastResult> all;
  for (const auto& run : a) all.insert(all.end(), run.forecasts.begin(), run.forecasts.end());
  const auto report = evaluate(all, sim.panel, 0.95);
  ASSERT_EQ(report.size(), 3u);
  for (const auto& r : report) EXPECT_TRUE(r.best_model == "gamlss" || r.best_model == "rf") << r.best_model;
}

TEST(RunForecasts, WellSpecifiedModelUsuallyWins) {
  // log-linear ZAGA generator: GAMLSS is the correct model class.
  int gamlss_wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig cfg;
    cfg.cantons = 2;
    cfg.rr_lag_effect = 0.0;
    const auto sim = simulate_panel(cfg, 500 + seed);
    auto spec = small_spec();
    spec.seed = seed;
    const auto run = run_forecasts(sim.panel, spec);
    const auto report = evaluate(run[0].forecasts, sim.panel, 0.95);
    gamlss_wins += report[0].best_model == "gamlss" ? 1 : 0;
  }
  EXPECT_GT(gamlss_wins, 10) << gamlss_wins << " of 20";
}

}  // namespace
}  // namespace lagcast
