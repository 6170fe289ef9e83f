#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/basis.hpp"
#include "lagcast/month.hpp"
#include "lagcast/panel.hpp"

namespace lagcast {

struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::vector<MonthIndex> months;  // month of each row (may be empty for ad-hoc designs)

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index cols() const noexcept { return x.cols(); }
};

struct Design {
  DesignMatrix matrix;
  Eigen::VectorXd y;
};

// A named covariate block of the design.
struct CovariateBlock {
  std::string name;
  int var_dim = 1;
  int lag_dim = 1;
  // Full B-spline bases sum to one across j, which duplicates the intercept;
  // the first variable-basis function is then left out of the design.
  bool drop_first_var = false;

  int columns() const noexcept { return (var_dim - (drop_first_var ? 1 : 0)) * lag_dim; }
};

// Column layout shared by the fitted design and every forecast row:
// (Intercept), rr_lag1, the cross-basis blocks, then month02..month12
// (January is the reference month).
class DesignLayout {
 public:
  DesignLayout() = default;
  explicit DesignLayout(std::vector<CovariateBlock> blocks);

  static DesignLayout for_builders(std::span<const std::string> names, std::span<const CrossBasisBuilder> builders);

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<CovariateBlock>& blocks() const noexcept { return blocks_; }
  Eigen::Index width() const noexcept { return static_cast<Eigen::Index>(names_.size()); }

  // cb_rows[i] is the full (v * l) cross-basis row of block i.
  Eigen::RowVectorXd row(double rr_lag, std::span<const Eigen::RowVectorXd> cb_rows, MonthIndex month) const;

 private:
  std::vector<CovariateBlock> blocks_;
  std::vector<std::string> names_;
};

struct NamedCrossBasis {
  std::string name;
  CrossBasis basis;
};

// Response y[t] = RR_t with predictors RR_{t-1}, cross-basis rows at t and
// month dummies. Rows before max(valid_from) + 1 are dropped.
// Errors: MisalignedInputs, RankDeficient (names the offending columns).
Design assemble_design(const RiskSeries& risk, std::span<const NamedCrossBasis> crossbases,
                       std::span<const MonthIndex> months);

// Throws Error(RankDeficient) naming the columns that are constant or
// linear combinations of earlier columns.
void require_full_rank(const DesignMatrix& design);

enum class PointFunctional { mixture_mean, mu, median };

std::string_view to_string(PointFunctional f) noexcept;
PointFunctional parse_point_functional(std::string_view text);

struct ZagaOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-9;
};

struct ZagaFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta_mu;
  double sigma_hat = 1.0;
  double nu_hat = 0.0;
  double loglik = 0.0;
  int n_obs = 0;
  int n_zero = 0;
  int n_params = 0;
  int iterations = 0;
  bool nu_pinned = false;  // no zeros observed: nu fixed at 1 / (2n)
  Eigen::VectorXd se_beta;  // from the expected information of the gamma part
  std::vector<double> loglik_trace;  // full log-likelihood after each iteration (index 0 = start)
};

// Three-parameter zero-adjusted gamma regression: log link for mu with the
// design's covariates, intercept-only log sigma and logit nu. The likelihood
// factorizes, so nu is the zero proportion and (beta, sigma) maximize the
// gamma likelihood of the positive observations by Newton-Raphson with step
// halving and a profiled sigma update.
// Errors: AllZeroResponse, NegativeY, RankDeficient, MisalignedInputs,
// NonConvergence.
ZagaFit fit_zaga(const DesignMatrix& design, const Eigen::VectorXd& y, const ZagaOptions& options = {});

// Full ZAGA log-likelihood at the given parameters.
double zaga_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double sigma,
                   double nu);
// Gradient with respect to (beta, log sigma, logit nu).
Eigen::VectorXd zaga_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                           double sigma, double nu);

struct ResponsePrediction {
  Eigen::VectorXd mu;
  Eigen::VectorXd mean;  // (1 - nu) mu
};

// Errors: ColumnMismatch when names or widths differ.
ResponsePrediction predict_response(const ZagaFit& fit, const DesignMatrix& design);
double predict_mu(const ZagaFit& fit, const Eigen::RowVectorXd& row);
double point_forecast(const ZagaFit& fit, double mu, PointFunctional functional);

// -2 loglik + 2 (len(beta) + 2)
double aic(const ZagaFit& fit);

// Flat text record, one "key value" pair per line, 17 significant digits.
std::string serialize_fit(const ZagaFit& fit);
ZagaFit deserialize_fit(std::string_view text);

}  // namespace lagcast
