#include "lagcast/var.hpp"

#include <cmath>
#include <limits>

#include "lagcast/error.hpp"
#include "lagcast/numeric.hpp"

namespace lagcast {

namespace {

int deterministic_count(const VarSpec& spec) { return 1 + (spec.trend ? 1 : 0) + (spec.seasonal ? 11 : 0); }

// Fills the deterministic part of a regressor row; returns the next column.
Eigen::Index fill_deterministic(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, const VarSpec& spec, double t, MonthIndex month) {
  Eigen::Index c = 0;
  row(c++) = 1.0;
  if (spec.trend) row(c++) = t;
  if (spec.seasonal) {
    for (int m = 2; m <= 12; ++m) row(c++) = month.month == m ? 1.0 : 0.0;
  }
  return c;
}

std::vector<std::string> regressor_names(const VarSpec& spec, int k, int p) {
  std::vector<std::string> names{"const"};
  if (spec.trend) names.emplace_back("trend");
  if (spec.seasonal) {
    for (int m = 2; m <= 12; ++m) names.push_back((m < 10 ? "month0" : "month") + std::to_string(m));
  }
  for (int lag = 1; lag <= p; ++lag) {
    for (int j = 0; j < k; ++j) names.push_back("y" + std::to_string(j + 1) + ".l" + std::to_string(lag));
  }
  return names;
}

double spectral_radius(const std::vector<Eigen::MatrixXd>& a, int k) {
  const int p = static_cast<int>(a.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k * p, k * p);
  for (int i = 0; i < p; ++i) companion.block(0, i * k, k, k) = a[static_cast<std::size_t>(i)];
  if (p > 1) companion.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  const Eigen::VectorXcd eig = companion.eigenvalues();
  return eig.cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::VectorXd VarModel::conditional_mean(const Eigen::MatrixXd& previous, MonthIndex month) const {
  Eigen::VectorXd y = intercept;
  y += trend * static_cast<double>(month - origin + 1);
  if (month.month >= 2) y += seasonal.col(month.month - 2);
  const Eigen::Index rows = previous.rows();
  for (int lag = 1; lag <= p; ++lag) y += a[static_cast<std::size_t>(lag - 1)] * previous.row(rows - lag).transpose();
  return y;
}

VarModel fit_var(const Eigen::MatrixXd& series, MonthIndex start, int p, const VarSpec& spec, int first_row) {
  const auto total = static_cast<int>(series.rows());
  const auto k = static_cast<int>(series.cols());
  if (p < 1) fail(ErrorKind::InsufficientData, "VAR order must be >= 1");
  if (k < 1 || total <= k * p + 13) {
    fail(ErrorKind::InsufficientData, "VAR(" + std::to_string(p) + ") with " + std::to_string(k) + " series needs more than " +
                                          std::to_string(k * p + 13) + " rows, got " + std::to_string(total));
  }
  if (!series.allFinite()) fail(ErrorKind::InsufficientData, "VAR series contain non-finite values");
  if (first_row < 0) first_row = p;
  if (first_row < p) fail(ErrorKind::InsufficientData, "first response row precedes available lags");
  const int n = total - first_row;
  const int d = deterministic_count(spec);
  const int n_reg = d + k * p;
  if (n <= n_reg) {
    fail(ErrorKind::InsufficientData,
         std::to_string(n) + " usable rows cannot identify " + std::to_string(n_reg) + " regressors per equation");
  }

  Eigen::MatrixXd x(n, n_reg);
  Eigen::MatrixXd y(n, k);
  for (int r = 0; r < n; ++r) {
    const int t = first_row + r;
    const MonthIndex month = start.plus(t);
    Eigen::Index c = fill_deterministic(x.row(r), spec, static_cast<double>(t + 1), month);
    for (int lag = 1; lag <= p; ++lag) {
      for (int j = 0; j < k; ++j) x(r, c++) = series(t - lag, j);
    }
    y.row(r) = series.row(t);
  }

  VarModel model;
  model.p = p;
  model.k = k;
  model.spec = spec;
  model.origin = start;
  model.t_eff = n;
  model.regressors = regressor_names(spec, k, p);

  const auto aliased = aliased_columns(x);
  for (auto j : aliased) model.aliased.push_back(model.regressors[static_cast<std::size_t>(j)]);
  if (!aliased.empty() && !spec.allow_aliased) {
    std::string names;
    for (const auto& s : model.aliased) names += (names.empty() ? "" : ", ") + s;
    fail(ErrorKind::SingularRegressors, "VAR regressors are collinear: " + names);
  }
  if (n - static_cast<int>(x.cols() - static_cast<Eigen::Index>(aliased.size())) <= 0) {
    fail(ErrorKind::SingularRegressors, "no residual degrees of freedom");
  }
  const Eigen::MatrixXd coef = least_squares(x, y, aliased);  // n_reg x k
  model.residuals = y - x * coef;
  model.sigma = model.residuals.transpose() * model.residuals / static_cast<double>(n);
  model.sigma = 0.5 * (model.sigma + model.sigma.transpose());

  Eigen::Index c = 0;
  model.intercept = coef.row(c++).transpose();
  model.trend = spec.trend ? Eigen::VectorXd(coef.row(c++).transpose()) : Eigen::VectorXd::Zero(k);
  model.seasonal = Eigen::MatrixXd::Zero(k, 11);
  if (spec.seasonal) {
    for (int m = 0; m < 11; ++m) model.seasonal.col(m) = coef.row(c++).transpose();
  }
  for (int lag = 1; lag <= p; ++lag) {
    Eigen::MatrixXd a(k, k);
    for (int j = 0; j < k; ++j) a.col(j) = coef.row(c++).transpose();  // column j: effect of series j
    model.a.push_back(std::move(a));
  }
  model.spectral_radius = spectral_radius(model.a, k);
  return model;
}

LagSelection select_lag_bic(const Eigen::MatrixXd& series, MonthIndex start, int p_max, const VarSpec& spec) {
  if (p_max < 1) fail(ErrorKind::InsufficientData, "p_max must be >= 1");
  const auto total = static_cast<int>(series.rows());
  const auto k = static_cast<int>(series.cols());
  const int d = deterministic_count(spec);
  // Largest order whose model is identifiable on the common sample.
  while (p_max > 1 && (total <= k * p_max + 13 || total - p_max <= d + k * p_max)) --p_max;

  LagSelection out;
  out.p_max = p_max;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    const VarModel m = fit_var(series, start, p, spec, p_max);
    const double t_eff = m.t_eff;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(m.sigma);
    double log_det = 0.0;
    const Eigen::VectorXd diag = ldlt.vectorD();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      log_det += diag(i) > 0.0 ? std::log(diag(i)) : -std::numeric_limits<double>::infinity();
    }
    const double params = static_cast<double>(d + k * p) * k;
    const double bic = log_det + std::log(t_eff) / t_eff * params;
    out.bic.push_back(bic);
    if (bic < best) {
      best = bic;
      out.p = p;
    }
  }
  return out;
}

VarForecast forecast_var(const VarModel& model, const VarHistory& history, int h) {
  if (h < 1) fail(ErrorKind::HorizonZero, "forecast horizon must be >= 1");
  const int k = model.k;
  const int p = model.p;
  if (history.last.rows() < p || history.last.cols() != k) {
    fail(ErrorKind::InsufficientData, "forecast needs the last " + std::to_string(p) + " observations of " +
                                          std::to_string(k) + " series");
  }
  VarForecast out;
  out.h = h;
  out.mean.resize(h, k);
  Eigen::MatrixXd path(p + h, k);
  path.topRows(p) = history.last.bottomRows(p);
  for (int s = 1; s <= h; ++s) {
    const MonthIndex month = history.last_month.plus(s);
    out.months.push_back(month);
    const Eigen::VectorXd y = model.conditional_mean(path.middleRows(s - 1, p), month);
    path.row(p + s - 1) = y.transpose();
    out.mean.row(s - 1) = y.transpose();
  }

  // Psi_0 = I, Psi_j = sum_{i=1..min(j,p)} A_i Psi_{j-i}
  std::vector<Eigen::MatrixXd> psi{Eigen::MatrixXd::Identity(k, k)};
  for (int j = 1; j < h; ++j) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= std::min(j, p); ++i) {
      next += model.a[static_cast<std::size_t>(i - 1)] * psi[static_cast<std::size_t>(j - i)];
    }
    psi.push_back(std::move(next));
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  out.lower.resize(h, k);
  out.upper.resize(h, k);
  for (int s = 0; s < h; ++s) {
    const auto& ps = psi[static_cast<std::size_t>(s)];
    cov += ps * model.sigma * ps.transpose();
    cov = 0.5 * (cov + cov.transpose());
    out.covariance.push_back(cov);
    for (int j = 0; j < k; ++j) {
      const double sd = std::sqrt(std::max(0.0, cov(j, j)));
      out.lower(s, j) = out.mean(s, j) - kZ95 * sd;
      out.upper(s, j) = out.mean(s, j) + kZ95 * sd;
    }
  }
  return out;
}

}  // namespace lagcast
