#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lagcast/month.hpp"
#include "lagcast/panel.hpp"

namespace lagcast {

// Generator for synthetic panels with a known data-generating process:
//  * climate: per canton a stable VAR(1) in standardized deviations z_t,
//    mapped to physical scales as base + seasonal cycle + scale * z_t;
//  * latent risk: y_t ~ ZAGA(mu_t, sigma, nu) with
//      log mu_t = intercept + rr_lag_effect * min(y_{t-1}, 5)
//                 + sum_c climate_effect[c] * sum_l w_l z_{c,t-l}
//                 + seasonal_amplitude * sin(2 pi (month - 1) / 12),
//    where w_l decreases linearly over lags 0..max_lag and sums to one;
//  * cases: Poisson(y_t * population * national incidence), national
//    totals add a rest-of-country population twice the study cantons'.
struct SimConfig {
  int cantons = 32;
  int months = 252;
  MonthIndex start{2000, 1};
  double nu = 0.16;
  double sigma = 0.5;
  double intercept = 0.0;
  double rr_lag_effect = 0.1;
  std::array<double, 5> climate_effect{0.8, 0.5, 0.3, 0.3, 0.2};
  double seasonal_amplitude = 0.5;
  int max_lag = 18;
  Eigen::Matrix<double, 5, 5> climate_ar = default_climate_ar();
  double incidence = 8e-4;  // national cases per person per month
  int burn_in = 60;

  static Eigen::Matrix<double, 5, 5> default_climate_ar();
  // Throws Error(ConstraintViolation) or Error(UnstableGenerator).
  void validate() const;
};

struct CantonTruth {
  std::string canton_id;
  std::vector<double> mu;         // per panel month
  std::vector<double> latent_rr;  // ZAGA draw before Poisson thinning
  double intercept = 0.0;
};

struct SimulatedPanel {
  MonthlyPanel panel;
  std::vector<CantonTruth> truth;  // canton order of panel.cantons
  SimConfig config;
};

// Deterministic given (config, seed). Canton ids are "C01", "C02", ...
SimulatedPanel simulate_panel(const SimConfig& config, std::uint64_t seed);

}  // namespace lagcast
