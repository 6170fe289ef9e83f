#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lagcast/month.hpp"

namespace lagcast {

inline constexpr double kZ95 = 1.959964;

struct VarSpec {
  bool trend = true;     // linear month counter, 1 at the first series row
  bool seasonal = true;  // month02..month12 dummies, January reference
  // Regressors that are exact linear combinations of earlier ones (for
  // example the lag of a noiseless trend) get a zero coefficient and are
  // listed in VarModel::aliased. When false they raise SingularRegressors.
  bool allow_aliased = true;
};

struct VarModel {
  int p = 1;
  int k = 0;
  std::vector<Eigen::MatrixXd> a;  // A_1..A_p, each k x k
  Eigen::VectorXd intercept;       // k
  Eigen::VectorXd trend;           // k (zero when the spec has no trend)
  Eigen::MatrixXd seasonal;        // k x 11 (zero when the spec has no seasonality)
  Eigen::MatrixXd sigma;           // k x k residual covariance, divisor T_eff
  VarSpec spec;
  MonthIndex origin;  // month of series row 0
  int t_eff = 0;      // rows used in estimation
  std::vector<std::string> regressors;
  std::vector<std::string> aliased;
  double spectral_radius = 0.0;  // of the companion matrix
  Eigen::MatrixXd residuals;     // t_eff x k

  bool stable() const noexcept { return spectral_radius < 1.0; }
  // Mean of y at series row t given the p previous rows (oldest first).
  Eigen::VectorXd conditional_mean(const Eigen::MatrixXd& previous, MonthIndex month) const;
};

// Equation-by-equation OLS on [1, t, month dummies, y_{t-1}, ..., y_{t-p}].
// `first_row` fixes the first response row (default p); select_lag_bic uses
// it to estimate every candidate on the same sample.
// Errors: InsufficientData (T <= k p + 13), SingularRegressors.
VarModel fit_var(const Eigen::MatrixXd& series, MonthIndex start, int p, const VarSpec& spec = {}, int first_row = -1);

struct LagSelection {
  int p = 1;
  int p_max = 1;  // after capping by the sample size
  std::vector<double> bic;  // bic[i] for p = i + 1
};

// argmin_p ln det(Sigma_p) + (ln T_eff / T_eff) * (regressors per equation * k)
// over p = 1..p_max on the common sample of rows t >= p_max; ties go to the
// smallest p. p_max is lowered until the largest model is estimable.
LagSelection select_lag_bic(const Eigen::MatrixXd& series, MonthIndex start, int p_max, const VarSpec& spec = {});

struct VarHistory {
  Eigen::MatrixXd last;  // at least p rows x k, oldest first
  MonthIndex last_month;  // month of the final row
};

struct VarForecast {
  int h = 0;
  std::vector<MonthIndex> months;
  Eigen::MatrixXd mean;  // h x k
  std::vector<Eigen::MatrixXd> covariance;  // per step, k x k
  Eigen::MatrixXd lower;  // mean - 1.959964 sd
  Eigen::MatrixXd upper;
};

// Recursive mean with deterministic terms carried forward; step-s
// covariance sum_{j<s} Psi_j Sigma Psi_j'. Errors: HorizonZero, InsufficientData.
VarForecast forecast_var(const VarModel& model, const VarHistory& history, int h);

}  // namespace lagcast
