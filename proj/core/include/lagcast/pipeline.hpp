#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/basis.hpp"
#include "lagcast/forest.hpp"
#include "lagcast/gamlss.hpp"
#include "lagcast/metrics.hpp"
#include "lagcast/panel.hpp"
#include "lagcast/var.hpp"

namespace lagcast {

enum class Method { gamlss, rf };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view text);

struct CovariatePlan {
  BasisSpec var;
  BasisSpec lag;
};

struct CantonSpec {
  // precip and ssta on cubic B-splines, the others linear; linear lag basis.
  std::array<CovariatePlan, kClimateCount> plans = default_plans();
  int max_lag = 18;
  std::vector<Method> methods{Method::gamlss, Method::rf};
  MonthIndex train_start{2000, 1};
  MonthIndex train_end{2020, 12};
  int horizon = 3;
  int bootstrap_replicates = 100;
  int block_length = 6;
  std::uint64_t seed = 1;
  double alpha = 0.95;
  ForestConfig forest;
  ZagaOptions zaga;
  PointFunctional point = PointFunctional::mixture_mean;
  int var_p_max = 13;
  VarSpec var_spec;
  bool var_standardize = false;

  static std::array<CovariatePlan, kClimateCount> default_plans();
  int train_length() const noexcept { return static_cast<int>(train_end - train_start) + 1; }
  // Throws Error(ConstraintViolation).
  void validate() const;
};

struct MethodFit {
  Method method = Method::gamlss;
  std::optional<ZagaFit> zaga;
  std::optional<ForestModel> forest;
  Eigen::VectorXd fitted;        // in-sample fitted RR over the design rows
  Eigen::VectorXd residual_base;  // fitted values the bootstrap residuals are taken against
};

struct CantonFit {
  std::string canton_id;
  RiskSeries risk;          // training window only
  Eigen::MatrixXd climate;  // training window, T x 5
  std::vector<CrossBasisBuilder> builders;
  DesignLayout layout;
  Design design;
  std::vector<MethodFit> methods;

  const MethodFit& method(Method m) const;
  MonthIndex last_month() const { return risk.months.back(); }
};

// Builds RR, the five cross-bases and the shared design on the training
// window, then fits every requested method. Only training-window data is
// read. Errors: ConstraintViolation (train window shorter than
// max_lag + 14 months) and errors propagated from the fitting modules.
CantonFit fit_canton(const MonthlyPanel& panel, std::string_view canton_id, const CantonSpec& spec);

// Rebuilds the training design with frozen basis knots and attaches
// previously fitted models (used when fits are loaded from disk).
CantonFit rebuild_canton(const MonthlyPanel& panel, std::string_view canton_id, const CantonSpec& spec,
                         std::vector<VariableBasis> variable_bases, std::vector<MethodFit> methods);

struct ClimateForecast {
  VarModel model;
  VarForecast forecast;
  int selected_p = 1;
};

// VAR on the training climate with BIC order selection, forecast h months.
ClimateForecast forecast_climate(const CantonFit& fit, const CantonSpec& spec);

MethodFit refit_method(const CantonFit& fit, Method method, const Eigen::VectorXd& y, const CantonSpec& spec,
                       std::uint64_t forest_seed);

// Recursive h-step RR path: each step appends the climate forecast row,
// rebuilds the cross-basis rows for the new month, uses the previous
// predicted RR (observed RR at step 1) as the lagged covariate and clamps
// the prediction at zero. `shocks`, when given, are added to each step's
// prediction before clamping and carried into the next step's lag.
// Errors: HorizonExceedsVar.
std::vector<double> forecast_recursive(const CantonFit& fit, const MethodFit& method,
                                       const Eigen::MatrixXd& climate_path, int h, const CantonSpec& spec,
                                       std::span<const double> shocks = {});

struct ForecastResult {
  std::string canton_id;
  std::string method;
  std::vector<MonthIndex> months;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct BootstrapIntervals {
  std::vector<double> lower;
  std::vector<double> upper;
  Eigen::MatrixXd paths;  // replicates x h
};

// Circular block bootstrap of the in-sample residuals: each replicate
// draws blocks of `block_length` residuals with replacement, refits the
// method on y* = max(0, fitted + e*) over the fixed design and reruns the
// recursive forecast with the continuation of the resampled residual
// stream as future shocks. Bounds are type-7 quantiles at (1 -/+ alpha)/2.
// Errors: TooFewResiduals.
BootstrapIntervals bootstrap_intervals(const CantonFit& fit, const MethodFit& method,
                                       const Eigen::MatrixXd& climate_path, const CantonSpec& spec);

// Point path plus bootstrap bounds; bounds are widened to contain the point.
ForecastResult forecast_method(const CantonFit& fit, const MethodFit& method, const ClimateForecast& climate,
                               const CantonSpec& spec);

// Last observed RR carried forward; bounds from empirical quantiles of
// s-step changes over the training window, clamped at zero.
ForecastResult persistence_forecast(const RiskSeries& train, int h, double alpha);

inline constexpr std::string_view kNoBestModel = "none";

struct CantonReport {
  std::string canton_id;
  std::vector<MethodScore> scores;
  std::string best_model;  // kNoBestModel when the test window has zero mean RR
  bool scorable = true;    // false: metrics are NaN
};

// Scores every forecast against observed RR of its months (read from the
// full panel) and picks the best method per canton.
// Errors: MissingObservations.
std::vector<CantonReport> evaluate(std::span<const ForecastResult> results, const MonthlyPanel& panel, double alpha);

struct CantonRun {
  CantonFit fit;
  ClimateForecast climate;
  std::vector<ForecastResult> forecasts;
};

// fit_canton + forecast_climate + forecast_method for every canton, in
// canton-id order, parallel across cantons.
std::vector<CantonRun> run_forecasts(const MonthlyPanel& panel, const CantonSpec& spec);

}  // namespace lagcast
