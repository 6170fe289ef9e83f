#include "lagcast/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lagcast/error.hpp"
#include "lagcast/random.hpp"
#include "lagcast/text.hpp"
#include "lagcast/zadist.hpp"

namespace lagcast {

namespace {
constexpr double kFeedbackCap = 5.0;
}  // namespace

namespace {

struct ClimateScale {
  double base;
  double seasonal;
  double scale;
};

// precip, ssta, ndvi, lst, tna
constexpr std::array<ClimateScale, 5> kScales{{
    {250.0, 100.0, 30.0},
    {0.0, 0.3, 0.8},
    {0.6, 0.1, 0.05},
    {300.0, 3.0, 1.5},
    {0.0, 0.2, 0.4},
}};

std::string canton_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "C%02d", i + 1);
  return buf;
}

}  // namespace

Eigen::Matrix<double, 5, 5> SimConfig::default_climate_ar() {
  Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
  a.diagonal() << 0.6, 0.8, 0.5, 0.5, 0.7;
  a(0, 1) = 0.1;   // ENSO feeds rainfall
  a(3, 2) = -0.1;  // vegetation cools the surface
  return a;
}

void SimConfig::validate() const {
  if (cantons < 2) fail(ErrorKind::ConstraintViolation, "simulation needs at least 2 cantons");
  if (months < 60) fail(ErrorKind::ConstraintViolation, "simulation needs at least 60 months");
  if (!(nu >= 0.0 && nu < 1.0) || !(sigma > 0.0)) fail(ErrorKind::ConstraintViolation, "invalid ZAGA parameters");
  if (max_lag < 0 || burn_in < max_lag + 1) fail(ErrorKind::ConstraintViolation, "burn-in must exceed the maximum lag");
  if (!(incidence > 0.0)) fail(ErrorKind::ConstraintViolation, "incidence must be positive");
  const double radius = climate_ar.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0)) {
    fail(ErrorKind::UnstableGenerator, "climate VAR spectral radius " + format_double(radius) + " >= 1");
  }
}

SimulatedPanel simulate_panel(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  SimulatedPanel out;
  out.config = config;
  const int total = config.months + config.burn_in;
  const int lags = config.max_lag;

  // Lag weights: linear decay, summing to one.
  std::vector<double> w(static_cast<std::size_t>(lags + 1));
  double wsum = 0.0;
  for (int l = 0; l <= lags; ++l) wsum += w[static_cast<std::size_t>(l)] = static_cast<double>(lags + 1 - l);
  for (auto& v : w) v /= wsum;

  const ZagaParams base_params{1.0, config.sigma, config.nu};
  std::vector<std::vector<std::int64_t>> canton_cases(static_cast<std::size_t>(config.cantons));
  std::vector<std::vector<std::int64_t>> canton_pop(static_cast<std::size_t>(config.cantons));
  std::vector<double> incidence(static_cast<std::size_t>(config.months));
  for (int t = 0; t < config.months; ++t) {
    const MonthIndex m = config.start.plus(t);
    incidence[static_cast<std::size_t>(t)] =
        config.incidence * std::exp(0.3 * std::sin(2.0 * std::numbers::pi * (m.month - 1) / 12.0));
  }

  for (int c = 0; c < config.cantons; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::string id = canton_name(c);

    // Climate deviations.
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(total, 5);
    for (int t = 1; t < total; ++t) {
      Eigen::Matrix<double, 5, 1> eps;
      for (int j = 0; j < 5; ++j) eps(j) = normal(rng);
      z.row(t) = (config.climate_ar * z.row(t - 1).transpose() + eps).transpose();
    }
    std::array<double, 5> offset{};
    for (int j = 0; j < 5; ++j) offset[static_cast<std::size_t>(j)] = 0.5 * kScales[static_cast<std::size_t>(j)].scale * normal(rng);

    CantonData data;
    data.series.canton_id = id;
    CantonTruth truth;
    truth.canton_id = id;
    truth.intercept = config.intercept;
    const double pop0 = 50000.0 + 350000.0 * uniform01(rng);

    double prev_y = 1.0;
    for (int t = 0; t < total; ++t) {
      const int panel_t = t - config.burn_in;
      const MonthIndex month = config.start.plus(panel_t);
      double log_mu = config.intercept + config.rr_lag_effect * prev_y +
                      config.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * (month.month - 1) / 12.0);
      if (t >= lags) {
        for (int j = 0; j < 5; ++j) {
          double exposure = 0.0;
          for (int l = 0; l <= lags; ++l) exposure += w[static_cast<std::size_t>(l)] * z(t - l, j);
          log_mu += config.climate_effect[static_cast<std::size_t>(j)] * exposure;
        }
      }
      ZagaParams params = base_params;
      params.mu = std::exp(log_mu);
      const double y = zaga_draw(params, rng);
      // exp(b * y) feedback explodes for large y; cap what the next month sees.
      prev_y = std::min(y, kFeedbackCap);
      if (panel_t < 0) continue;

      ClimateRecord rec;
      for (int j = 0; j < 5; ++j) {
        const auto& s = kScales[static_cast<std::size_t>(j)];
        rec[static_cast<std::size_t>(j)] = s.base + offset[static_cast<std::size_t>(j)] +
                                           s.seasonal * std::sin(2.0 * std::numbers::pi * (month.month - 1) / 12.0 + j) +
                                           s.scale * z(t, j);
      }
      rec.precip = std::max(0.0, rec.precip);
      rec.ndvi = std::clamp(rec.ndvi, -1.0, 1.0);
      data.climate.push_back(rec);

      const auto pop = static_cast<std::int64_t>(std::llround(pop0 * (1.0 + 0.001 * panel_t)));
      const double lambda = y * static_cast<double>(pop) * incidence[static_cast<std::size_t>(panel_t)];
      std::int64_t cases = 0;
      if (lambda > 0.0) cases = std::poisson_distribution<std::int64_t>(lambda)(rng);
      data.series.months.push_back(month);
      data.series.cases.push_back(cases);
      data.series.population.push_back(pop);
      truth.mu.push_back(params.mu);
      truth.latent_rr.push_back(y);
    }
    canton_cases[static_cast<std::size_t>(c)] = data.series.cases;
    canton_pop[static_cast<std::size_t>(c)] = data.series.population;
    out.panel.cantons.emplace(id, std::move(data));
    out.truth.push_back(std::move(truth));
  }

  // National totals: study cantons plus a rest of country twice their size.
  Rng rng(derive_seed(seed, 0xC0FFEEULL));
  auto& national = out.panel.national;
  national.canton_id = std::string(kNationalId);
  for (int t = 0; t < config.months; ++t) {
    std::int64_t pop = 0;
    std::int64_t cases = 0;
    for (int c = 0; c < config.cantons; ++c) {
      pop += canton_pop[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
      cases += canton_cases[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
    }
    const std::int64_t rest = 2 * pop;
    cases += std::poisson_distribution<std::int64_t>(static_cast<double>(rest) * incidence[static_cast<std::size_t>(t)])(rng);
    national.months.push_back(config.start.plus(t));
    national.population.push_back(pop + rest);
    national.cases.push_back(std::max<std::int64_t>(cases, 1));
  }
  out.panel.validate();
  return out;
}

}  // namespace lagcast
