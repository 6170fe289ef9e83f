#include "lagcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lagcast/error.hpp"
#include "lagcast/numeric.hpp"
#include "lagcast/parallel.hpp"
#include "lagcast/random.hpp"

namespace lagcast {

std::string_view to_string(Method m) noexcept { return m == Method::gamlss ? "gamlss" : "rf"; }

Method parse_method(std::string_view text) {
  if (text == "gamlss") return Method::gamlss;
  if (text == "rf") return Method::rf;
  fail(ErrorKind::InvalidSpec, "unknown method '" + std::string(text) + "'");
}

std::array<CovariatePlan, kClimateCount> CantonSpec::default_plans() {
  const BasisSpec lag = BasisSpec::linear();
  return {{
      {BasisSpec::bspline(3, 4), lag},  // precip
      {BasisSpec::bspline(3, 4), lag},  // ssta
      {BasisSpec::linear(), lag},       // ndvi
      {BasisSpec::linear(), lag},       // lst
      {BasisSpec::linear(), lag},       // tna
  }};
}

void CantonSpec::validate() const {
  for (const auto& plan : plans) {
    plan.var.validate();
    plan.lag.validate();
  }
  if (max_lag < 0) fail(ErrorKind::ConstraintViolation, "max_lag must be non-negative");
  if (methods.empty()) fail(ErrorKind::ConstraintViolation, "no fitting method selected");
  if (train_end < train_start) fail(ErrorKind::ConstraintViolation, "train window ends before it starts");
  if (train_length() <= max_lag + 13) {
    fail(ErrorKind::ConstraintViolation, "train window of " + std::to_string(train_length()) +
                                             " months is too short; need more than " + std::to_string(max_lag + 13));
  }
  if (horizon < 1) fail(ErrorKind::ConstraintViolation, "test horizon must be >= 1");
  if (bootstrap_replicates < 0) fail(ErrorKind::ConstraintViolation, "bootstrap replicates must be >= 0");
  if (block_length < 1) fail(ErrorKind::ConstraintViolation, "bootstrap block length must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::ConstraintViolation, "alpha must lie in (0, 1)");
  if (var_p_max < 1) fail(ErrorKind::ConstraintViolation, "var p_max must be >= 1");
}

const MethodFit& CantonFit::method(Method m) const {
  for (const auto& f : methods) {
    if (f.method == m) return f;
  }
  fail(ErrorKind::InvalidSpec, canton_id + " has no " + std::string(to_string(m)) + " fit");
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t canton_seed(const CantonSpec& spec, std::string_view canton_id) {
  return derive_seed(spec.seed, fnv1a(canton_id));
}

std::uint64_t replicate_seed(const CantonSpec& spec, std::string_view canton_id, Method m, int replicate) {
  const std::uint64_t stream = 1 + (m == Method::gamlss ? 0ULL : 1'000'000ULL) + static_cast<std::uint64_t>(replicate);
  return derive_seed(canton_seed(spec, canton_id), stream);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

struct TrainingData {
  RiskSeries risk;
  Eigen::MatrixXd climate;
};

TrainingData training_data(const MonthlyPanel& panel, std::string_view canton_id, const CantonSpec& spec) {
  spec.validate();
  const MonthlyPanel train = panel.window(spec.train_start, spec.train_end);
  TrainingData out;
  out.risk = compute_relative_risk(train, canton_id);
  const auto& climate = train.canton(canton_id).climate;
  out.climate.resize(static_cast<Eigen::Index>(climate.size()), static_cast<Eigen::Index>(kClimateCount));
  for (std::size_t t = 0; t < climate.size(); ++t) {
    for (std::size_t j = 0; j < kClimateCount; ++j) out.climate(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = climate[t][j];
  }
  return out;
}

void build_design(CantonFit& fit) {
  std::vector<NamedCrossBasis> bases;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < kClimateCount; ++j) {
    names.emplace_back(kClimateNames[j]);
    bases.push_back({names.back(), fit.builders[j].transform(column(fit.climate, static_cast<Eigen::Index>(j)))});
  }
  fit.design = assemble_design(fit.risk, bases, fit.risk.months);
  fit.layout = DesignLayout::for_builders(names, fit.builders);
}

}  // namespace

MethodFit refit_method(const CantonFit& fit, Method method, const Eigen::VectorXd& y, const CantonSpec& spec,
                       std::uint64_t forest_seed) {
  MethodFit out;
  out.method = method;
  if (method == Method::gamlss) {
    out.zaga = fit_zaga(fit.design.matrix, y, spec.zaga);
    const ResponsePrediction pred = predict_response(*out.zaga, fit.design.matrix);
    out.fitted.resize(pred.mu.size());
    for (Eigen::Index i = 0; i < pred.mu.size(); ++i) out.fitted(i) = point_forecast(*out.zaga, pred.mu(i), spec.point);
    out.residual_base = out.fitted;
  } else {
    ForestConfig config = spec.forest;
    config.seed = forest_seed;
    out.forest = fit_forest(fit.design.matrix, y, config);
    out.fitted = predict_forest(*out.forest, fit.design.matrix).cwiseMax(0.0);
    // Out-of-bag predictions give honest residuals; in-bag fits are optimistic.
    const Eigen::VectorXd oob = oob_predictions(*out.forest, fit.design.matrix);
    out.residual_base = out.fitted;
    for (Eigen::Index i = 0; i < oob.size(); ++i) {
      if (!std::isnan(oob(i))) out.residual_base(i) = std::max(0.0, oob(i));
    }
  }
  return out;
}

CantonFit fit_canton(const MonthlyPanel& panel, std::string_view canton_id, const CantonSpec& spec) {
  auto data = training_data(panel, canton_id, spec);
  CantonFit fit;
  fit.canton_id = std::string(canton_id);
  fit.risk = std::move(data.risk);
  fit.climate = std::move(data.climate);
  for (std::size_t j = 0; j < kClimateCount; ++j) {
    fit.builders.push_back(CrossBasisBuilder::fit(column(fit.climate, static_cast<Eigen::Index>(j)), spec.max_lag,
                                                  spec.plans[j].var, spec.plans[j].lag));
  }
  build_design(fit);
  const std::uint64_t seed = derive_seed(canton_seed(spec, canton_id), 0);
  for (Method m : spec.methods) fit.methods.push_back(refit_method(fit, m, fit.design.y, spec, seed));
  return fit;
}

CantonFit rebuild_canton(const MonthlyPanel& panel, std::string_view canton_id, const CantonSpec& spec,
                         std::vector<VariableBasis> variable_bases, std::vector<MethodFit> methods) {
  if (variable_bases.size() != kClimateCount) {
    fail(ErrorKind::MisalignedInputs, "expected " + std::to_string(kClimateCount) + " variable bases");
  }
  auto data = training_data(panel, canton_id, spec);
  CantonFit fit;
  fit.canton_id = std::string(canton_id);
  fit.risk = std::move(data.risk);
  fit.climate = std::move(data.climate);
  for (std::size_t j = 0; j < kClimateCount; ++j) {
    fit.builders.emplace_back(std::move(variable_bases[j]), LagBasis::make(spec.plans[j].lag, spec.max_lag), spec.max_lag);
  }
  build_design(fit);
  for (auto& m : methods) {
    const Eigen::Index width = m.zaga ? m.zaga->beta_mu.size() : static_cast<Eigen::Index>(m.forest->feature_names.size());
    if (width != fit.design.matrix.cols()) {
      fail(ErrorKind::ColumnMismatch, fit.canton_id + ": stored " + std::string(to_string(m.method)) +
                                          " fit does not match the rebuilt design");
    }
    if (m.zaga) {
      const ResponsePrediction pred = predict_response(*m.zaga, fit.design.matrix);
      m.fitted.resize(pred.mu.size());
      for (Eigen::Index i = 0; i < pred.mu.size(); ++i) m.fitted(i) = point_forecast(*m.zaga, pred.mu(i), spec.point);
      m.residual_base = m.fitted;
    } else {
      m.fitted = predict_forest(*m.forest, fit.design.matrix).cwiseMax(0.0);
      const Eigen::VectorXd oob = oob_predictions(*m.forest, fit.design.matrix);
      m.residual_base = m.fitted;
      for (Eigen::Index i = 0; i < oob.size(); ++i) {
        if (!std::isnan(oob(i))) m.residual_base(i) = std::max(0.0, oob(i));
      }
    }
    fit.methods.push_back(std::move(m));
  }
  return fit;
}

ClimateForecast forecast_climate(const CantonFit& fit, const CantonSpec& spec) {
  Eigen::MatrixXd series = fit.climate;
  Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(series.cols());
  Eigen::RowVectorXd scale = Eigen::RowVectorXd::Ones(series.cols());
  if (spec.var_standardize) {
    center = series.colwise().mean();
    for (Eigen::Index j = 0; j < series.cols(); ++j) {
      const double sd = std::sqrt((series.col(j).array() - center(j)).square().sum() / static_cast<double>(series.rows() - 1));
      scale(j) = sd > 0.0 ? sd : 1.0;
    }
    series = ((series.rowwise() - center).array().rowwise() / scale.array()).matrix();
  }
  const MonthIndex start = fit.risk.months.front();
  ClimateForecast out;
  out.selected_p = select_lag_bic(series, start, spec.var_p_max, spec.var_spec).p;
  out.model = fit_var(series, start, out.selected_p, spec.var_spec);
  VarHistory history{series.bottomRows(out.selected_p), fit.last_month()};
  out.forecast = forecast_var(out.model, history, spec.horizon);
  if (spec.var_standardize) {
    auto& f = out.forecast;
    f.mean = ((f.mean.array().rowwise() * scale.array()).rowwise() + center.array()).matrix();
    const Eigen::MatrixXd d = scale.transpose().asDiagonal();
    for (auto& cov : f.covariance) cov = d * cov * d;
    for (int s = 0; s < f.h; ++s) {
      for (Eigen::Index j = 0; j < f.mean.cols(); ++j) {
        const double sd = std::sqrt(std::max(0.0, f.covariance[static_cast<std::size_t>(s)](j, j)));
        f.lower(s, j) = f.mean(s, j) - kZ95 * sd;
        f.upper(s, j) = f.mean(s, j) + kZ95 * sd;
      }
    }
  }
  return out;
}

std::vector<double> forecast_recursive(const CantonFit& fit, const MethodFit& method,
                                       const Eigen::MatrixXd& climate_path, int h, const CantonSpec& spec,
                                       std::span<const double> shocks) {
  if (h < 1) fail(ErrorKind::HorizonZero, "forecast horizon must be >= 1");
  if (climate_path.rows() < h || climate_path.cols() != static_cast<Eigen::Index>(kClimateCount)) {
    fail(ErrorKind::HorizonExceedsVar, "climate forecast covers " + std::to_string(climate_path.rows()) +
                                           " months, horizon is " + std::to_string(h));
  }
  const auto n_train = static_cast<std::size_t>(fit.climate.rows());
  std::array<std::vector<double>, kClimateCount> extended;
  for (std::size_t j = 0; j < kClimateCount; ++j) {
    extended[j] = column(fit.climate, static_cast<Eigen::Index>(j));
    extended[j].reserve(n_train + static_cast<std::size_t>(h));
  }
  std::vector<Eigen::RowVectorXd> cb_rows(kClimateCount);
  std::vector<double> path;
  double rr_lag = fit.risk.rr.back();
  for (int s = 1; s <= h; ++s) {
    for (std::size_t j = 0; j < kClimateCount; ++j) extended[j].push_back(climate_path(s - 1, static_cast<Eigen::Index>(j)));
    const std::size_t t = n_train + static_cast<std::size_t>(s) - 1;
    for (std::size_t j = 0; j < kClimateCount; ++j) cb_rows[j] = fit.builders[j].row(extended[j], t);
    const Eigen::RowVectorXd row = fit.layout.row(rr_lag, cb_rows, fit.last_month().plus(s));
    double value = 0.0;
    if (method.zaga) {
      value = point_forecast(*method.zaga, predict_mu(*method.zaga, row), spec.point);
    } else {
      value = predict_forest_row(*method.forest, row);
    }
    if (!shocks.empty()) value += shocks[static_cast<std::size_t>(s - 1)];
    value = std::max(0.0, value);
    path.push_back(value);
    rr_lag = value;
  }
  return path;
}

BootstrapIntervals bootstrap_intervals(const CantonFit& fit, const MethodFit& method,
                                       const Eigen::MatrixXd& climate_path, const CantonSpec& spec) {
  const Eigen::Index n = fit.design.y.size();
  const int h = spec.horizon;
  if (n < 2 * spec.block_length) {
    fail(ErrorKind::TooFewResiduals, std::to_string(n) + " residuals cannot hold two blocks of " +
                                         std::to_string(spec.block_length));
  }
  const Eigen::VectorXd residuals = fit.design.y - method.residual_base;
  const int replicates = spec.bootstrap_replicates;
  BootstrapIntervals out;
  out.paths.resize(replicates, h);
  const auto total = static_cast<std::size_t>(n + h);

  std::vector<Eigen::RowVectorXd> rows(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
    const std::uint64_t seed = replicate_seed(spec, fit.canton_id, method.method, static_cast<int>(b));
    Rng rng(seed);
    std::vector<double> stream;
    stream.reserve(total + static_cast<std::size_t>(spec.block_length));
    while (stream.size() < total) {
      const auto start = uniform_index(rng, static_cast<std::uint64_t>(n));
      for (int j = 0; j < spec.block_length && stream.size() < total; ++j) {
        stream.push_back(residuals(static_cast<Eigen::Index>((start + static_cast<std::uint64_t>(j)) % static_cast<std::uint64_t>(n))));
      }
    }
    Eigen::VectorXd y_star(n);
    for (Eigen::Index i = 0; i < n; ++i) y_star(i) = std::max(0.0, method.residual_base(i) + stream[static_cast<std::size_t>(i)]);
    const MethodFit refit = refit_method(fit, method.method, y_star, spec, derive_seed(seed, 7));
    const std::span<const double> shocks(stream.data() + n, static_cast<std::size_t>(h));
    const auto path = forecast_recursive(fit, refit, climate_path, h, spec, shocks);
    Eigen::RowVectorXd r(h);
    for (int s = 0; s < h; ++s) r(s) = path[static_cast<std::size_t>(s)];
    rows[b] = std::move(r);
  });
  for (int b = 0; b < replicates; ++b) out.paths.row(b) = rows[static_cast<std::size_t>(b)];

  const double lo_p = (1.0 - spec.alpha) / 2.0;
  const double hi_p = 1.0 - lo_p;
  for (int s = 0; s < h; ++s) {
    if (replicates == 0) {
      out.lower.push_back(0.0);
      out.upper.push_back(0.0);
      continue;
    }
    const auto values = column(out.paths, s);
    out.lower.push_back(quantile_type7(values, lo_p));
    out.upper.push_back(quantile_type7(values, hi_p));
  }
  return out;
}

ForecastResult forecast_method(const CantonFit& fit, const MethodFit& method, const ClimateForecast& climate,
                               const CantonSpec& spec) {
  ForecastResult out;
  out.canton_id = fit.canton_id;
  out.method = std::string(to_string(method.method));
  out.months = climate.forecast.months;
  out.months.resize(static_cast<std::size_t>(spec.horizon));
  out.point = forecast_recursive(fit, method, climate.forecast.mean, spec.horizon, spec);
  if (spec.bootstrap_replicates > 0) {
    const auto boot = bootstrap_intervals(fit, method, climate.forecast.mean, spec);
    out.lower = boot.lower;
    out.upper = boot.upper;
  } else {
    out.lower = out.point;
    out.upper = out.point;
  }
  for (std::size_t s = 0; s < out.point.size(); ++s) {
    out.lower[s] = std::min(out.lower[s], out.point[s]);
    out.upper[s] = std::max(out.upper[s], out.point[s]);
  }
  return out;
}

ForecastResult persistence_forecast(const RiskSeries& train, int h, double alpha) {
  const auto n = train.rr.size();
  if (h < 1) fail(ErrorKind::HorizonZero, "forecast horizon must be >= 1");
  if (n <= static_cast<std::size_t>(h) + 1) fail(ErrorKind::TooFewResiduals, "training series too short for persistence");
  ForecastResult out;
  out.canton_id = train.canton_id;
  out.method = "persistence";
  const double last = train.rr.back();
  const double lo_p = (1.0 - alpha) / 2.0;
  for (int s = 1; s <= h; ++s) {
    std::vector<double> changes;
    for (std::size_t t = 0; t + static_cast<std::size_t>(s) < n; ++t) changes.push_back(train.rr[t + static_cast<std::size_t>(s)] - train.rr[t]);
    out.months.push_back(train.months.back().plus(s));
    out.point.push_back(last);
    out.lower.push_back(std::max(0.0, last + quantile_type7(changes, lo_p)));
    out.upper.push_back(std::max(last, last + quantile_type7(changes, 1.0 - lo_p)));
    out.lower.back() = std::min(out.lower.back(), last);
  }
  return out;
}

std::vector<CantonReport> evaluate(std::span<const ForecastResult> results, const MonthlyPanel& panel, double alpha) {
  std::map<std::string, std::vector<const ForecastResult*>> by_canton;
  for (const auto& r : results) by_canton[r.canton_id].push_back(&r);
  std::vector<CantonReport> out;
  for (const auto& [canton, items] : by_canton) {
    if (!panel.cantons.contains(canton)) fail(ErrorKind::MissingObservations, "no observations for canton " + canton);
    const RiskSeries risk = compute_relative_risk(panel, canton);
    CantonReport report;
    report.canton_id = canton;
    for (const auto* r : items) {
      ScoredForecast scored;
      scored.alpha = alpha;
      for (std::size_t s = 0; s < r->months.size(); ++s) {
        const auto it = std::find(risk.months.begin(), risk.months.end(), r->months[s]);
        if (it == risk.months.end()) {
          fail(ErrorKind::MissingObservations, canton + ": no observed RR for " + r->months[s].to_string());
        }
        scored.observed.push_back(risk.rr[static_cast<std::size_t>(it - risk.months.begin())]);
      }
      scored.point = r->point;
      scored.lower = r->lower;
      scored.upper = r->upper;
      if (scored.mean_observed() == 0.0) {
        // Both metrics divide by the mean observed RR; nothing to rank.
        scored.validate();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        report.scores.push_back(MethodScore{r->method, scored.observed, nan, nan});
        report.scorable = false;
      } else {
        report.scores.push_back(score_method(r->method, scored));
      }
    }
    std::sort(report.scores.begin(), report.scores.end(),
              [](const MethodScore& a, const MethodScore& b) { return a.method < b.method; });
    report.best_model = report.scorable ? best_model(report.scores).method : std::string(kNoBestModel);
    out.push_back(std::move(report));
  }
  return out;
}

std::vector<CantonRun> run_forecasts(const MonthlyPanel& panel, const CantonSpec& spec) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : panel.cantons) ids.push_back(id);
  std::vector<std::optional<CantonRun>> runs(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    CantonRun run{fit_canton(panel, ids[i], spec), {}, {}};
    run.climate = forecast_climate(run.fit, spec);
    for (const auto& m : run.fit.methods) run.forecasts.push_back(forecast_method(run.fit, m, run.climate, spec));
    runs[i] = std::move(run);
  });
  std::vector<CantonRun> out;
  for (auto& r : runs) out.push_back(std::move(*r));
  return out;
}

}  // namespace lagcast
