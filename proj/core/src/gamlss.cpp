#include "lagcast/gamlss.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <sstream>

#include "lagcast/error.hpp"
#include "lagcast/numeric.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

namespace {

std::string month_dummy_name(int month) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "month%02d", month);
  return buf;
}

}  // namespace

DesignLayout::DesignLayout(std::vector<CovariateBlock> blocks) : blocks_(std::move(blocks)) {
  names_ = {"(Intercept)", "rr_lag1"};
  for (const auto& b : blocks_) {
    for (int j = b.drop_first_var ? 1 : 0; j < b.var_dim; ++j) {
      for (int k = 0; k < b.lag_dim; ++k) {
        names_.push_back(b.name + ".v" + std::to_string(j + 1) + ".l" + std::to_string(k + 1));
      }
    }
  }
  for (int m = 2; m <= 12; ++m) names_.push_back(month_dummy_name(m));
}

DesignLayout DesignLayout::for_builders(std::span<const std::string> names,
                                        std::span<const CrossBasisBuilder> builders) {
  std::vector<CovariateBlock> blocks;
  for (std::size_t i = 0; i < builders.size(); ++i) {
    const auto& vb = builders[i].variable_basis();
    blocks.push_back({names[i], vb.dimension(), builders[i].lag_basis().dimension(),
                      vb.spec().kind == BasisKind::bspline});
  }
  return DesignLayout(std::move(blocks));
}

Eigen::RowVectorXd DesignLayout::row(double rr_lag, std::span<const Eigen::RowVectorXd> cb_rows,
                                     MonthIndex month) const {
  if (cb_rows.size() != blocks_.size()) {
    fail(ErrorKind::MisalignedInputs, "expected " + std::to_string(blocks_.size()) + " cross-basis rows, got " +
                                          std::to_string(cb_rows.size()));
  }
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(width());
  Eigen::Index c = 0;
  out(c++) = 1.0;
  out(c++) = rr_lag;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (cb_rows[i].size() != b.var_dim * b.lag_dim) {
      fail(ErrorKind::MisalignedInputs, "cross-basis row for " + b.name + " has the wrong width");
    }
    const Eigen::Index skip = b.drop_first_var ? b.lag_dim : 0;
    for (Eigen::Index j = skip; j < cb_rows[i].size(); ++j) out(c++) = cb_rows[i](j);
  }
  if (month.month >= 2) out(c + month.month - 2) = 1.0;
  return out;
}

void require_full_rank(const DesignMatrix& design) {
  const auto aliased = aliased_columns(design.x);
  if (aliased.empty()) return;
  std::string names;
  for (std::size_t i = 0; i < aliased.size(); ++i) {
    if (i) names += ", ";
    const auto j = static_cast<std::size_t>(aliased[i]);
    names += j < design.names.size() ? design.names[j] : "column " + std::to_string(j);
  }
  fail(ErrorKind::RankDeficient, "design is not of full column rank; constant or collinear columns: " + names);
}

Design assemble_design(const RiskSeries& risk, std::span<const NamedCrossBasis> crossbases,
                       std::span<const MonthIndex> months) {
  const auto n = static_cast<Eigen::Index>(months.size());
  if (risk.months.size() != months.size() || !std::equal(months.begin(), months.end(), risk.months.begin())) {
    fail(ErrorKind::MisalignedInputs, "risk series months do not match design months");
  }
  Eigen::Index first = 1;
  std::vector<CovariateBlock> blocks;
  for (const auto& cb : crossbases) {
    if (cb.basis.matrix.rows() != n) {
      fail(ErrorKind::MisalignedInputs, "cross-basis " + cb.name + " has " + std::to_string(cb.basis.matrix.rows()) +
                                            " rows, expected " + std::to_string(n));
    }
    first = std::max(first, cb.basis.valid_from + 1);
    blocks.push_back({cb.name, cb.basis.var_dim, cb.basis.lag_dim, cb.basis.var_spec.kind == BasisKind::bspline});
  }
  if (first >= n) fail(ErrorKind::MisalignedInputs, "no rows left after dropping incomplete lags");
  const DesignLayout layout(std::move(blocks));
  Design out;
  out.matrix.names = layout.names();
  out.matrix.x.resize(n - first, layout.width());
  out.y.resize(n - first);
  std::vector<Eigen::RowVectorXd> cb_rows(crossbases.size());
  for (Eigen::Index t = first; t < n; ++t) {
    for (std::size_t i = 0; i < crossbases.size(); ++i) cb_rows[i] = crossbases[i].basis.matrix.row(t);
    const auto ts = static_cast<std::size_t>(t);
    out.matrix.x.row(t - first) = layout.row(risk.rr[ts - 1], cb_rows, months[ts]);
    out.matrix.months.push_back(months[ts]);
    out.y(t - first) = risk.rr[ts];
  }
  require_full_rank(out.matrix);
  return out;
}

std::string_view to_string(PointFunctional f) noexcept {
  switch (f) {
    case PointFunctional::mixture_mean: return "mixture_mean";
    case PointFunctional::mu: return "mu";
    case PointFunctional::median: return "median";
  }
  return "mixture_mean";
}

PointFunctional parse_point_functional(std::string_view text) {
  if (text == "mixture_mean") return PointFunctional::mixture_mean;
  if (text == "mu") return PointFunctional::mu;
  if (text == "median") return PointFunctional::median;
  fail(ErrorKind::InvalidSpec, "point functional must be mixture_mean, mu or median; got '" + std::string(text) + "'");
}

namespace {

struct PositivePart {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd log_y;
  double sum_log_y = 0.0;
};

// Gamma log-likelihood of the positive part with shape k and log-link mean.
double gamma_loglik(const PositivePart& pos, const Eigen::VectorXd& eta, double k) {
  const auto n = static_cast<double>(pos.y.size());
  const Eigen::ArrayXd ratio = pos.y.array() * (-eta.array()).exp();
  return n * (k * std::log(k) - std::lgamma(k)) + (k - 1.0) * pos.sum_log_y - k * eta.sum() - k * ratio.sum();
}

// Solves log k - digamma(k) = d for the shape maximizing the profiled likelihood.
double profile_shape(double d) {
  constexpr double kMaxShape = 1e12;
  if (!(d > 1.0 / (2.0 * kMaxShape))) return kMaxShape;
  // Minka's starting value.
  double k = (3.0 - d + std::sqrt((d - 3.0) * (d - 3.0) + 24.0 * d)) / (12.0 * d);
  for (int i = 0; i < 100; ++i) {
    const double f = std::log(k) - boost::math::digamma(k) - d;
    const double fprime = 1.0 / k - boost::math::trigamma(k);  // d/dk
    const double next_log = std::log(k) - f / (k * fprime);     // Newton in log k
    const double next = std::exp(next_log);
    if (std::abs(next - k) <= 1e-14 * k) {
      k = next;
      break;
    }
    k = next;
  }
  return std::min(k, kMaxShape);
}

double mean_deviance_term(const PositivePart& pos, const Eigen::VectorXd& eta) {
  const Eigen::ArrayXd ratio = pos.y.array() * (-eta.array()).exp();
  return (ratio - 1.0 - ratio.log()).mean();
}

double bernoulli_loglik(int n_zero, int n_pos, double nu) {
  double ll = 0.0;
  if (n_zero > 0) ll += n_zero * std::log(nu);
  if (n_pos > 0) ll += n_pos * std::log1p(-nu);
  return ll;
}

}  // namespace

ZagaFit fit_zaga(const DesignMatrix& design, const Eigen::VectorXd& y, const ZagaOptions& options) {
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  if (y.size() != n) fail(ErrorKind::MisalignedInputs, "response length differs from design rows");
  if (!design.names.empty() && static_cast<Eigen::Index>(design.names.size()) != p) {
    fail(ErrorKind::MisalignedInputs, "design names do not match its width");
  }
  if (n <= p) {
    fail(ErrorKind::MisalignedInputs,
         "need more rows (" + std::to_string(n) + ") than columns (" + std::to_string(p) + ")");
  }
  int n_zero = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y(i) >= 0.0) || !std::isfinite(y(i))) {
      fail(ErrorKind::NegativeY, "response row " + std::to_string(i) + " is " + format_double(y(i)));
    }
    if (y(i) == 0.0) ++n_zero;
  }
  if (n_zero == n) fail(ErrorKind::AllZeroResponse, "every response value is zero");
  if (!design.x.allFinite()) fail(ErrorKind::MisalignedInputs, "design contains non-finite values");

  ZagaFit fit;
  fit.names = design.names;
  fit.n_obs = static_cast<int>(n);
  fit.n_zero = n_zero;
  fit.n_params = static_cast<int>(p) + 2;
  if (n_zero == 0) {
    fit.nu_hat = 1.0 / (2.0 * static_cast<double>(n));
    fit.nu_pinned = true;
  } else {
    fit.nu_hat = static_cast<double>(n_zero) / static_cast<double>(n);
  }

  PositivePart pos;
  const Eigen::Index n_pos = n - n_zero;
  pos.x.resize(n_pos, p);
  pos.y.resize(n_pos);
  for (Eigen::Index i = 0, r = 0; i < n; ++i) {
    if (y(i) > 0.0) {
      pos.x.row(r) = design.x.row(i);
      pos.y(r++) = y(i);
    }
  }
  if (n_pos <= p) {
    fail(ErrorKind::RankDeficient, "only " + std::to_string(n_pos) + " positive observations for " +
                                       std::to_string(p) + " mean coefficients");
  }
  {
    DesignMatrix positive{pos.x, design.names, {}};
    require_full_rank(positive);
  }
  pos.log_y = pos.y.array().log().matrix();
  pos.sum_log_y = pos.log_y.sum();

  // Start: OLS of log(y + eps) with eps half the smallest positive value,
  // sigma by moments on the positives.
  const double eps = 0.5 * pos.y.minCoeff();
  const Eigen::VectorXd log_shifted = (pos.y.array() + eps).log().matrix();
  Eigen::VectorXd beta = pos.x.colPivHouseholderQr().solve(log_shifted);
  const double m = pos.y.mean();
  const double var = (pos.y.array() - m).square().sum() / std::max<double>(1.0, static_cast<double>(n_pos - 1));
  double shape = var > 0.0 ? m * m / var : 1e12;

  const double bern = bernoulli_loglik(n_zero, static_cast<int>(n_pos), fit.nu_hat);
  Eigen::VectorXd eta = pos.x * beta;
  double ll = gamma_loglik(pos, eta, shape);
  fit.loglik_trace.push_back(bern + ll);

  bool converged = false;
  int iter = 0;
  Eigen::VectorXd gradient;
  while (iter < options.max_iterations) {
    ++iter;
    const Eigen::ArrayXd w = pos.y.array() * (-eta.array()).exp();  // y / mu
    gradient = pos.x.transpose() * (w - 1.0).matrix();
    const Eigen::MatrixXd hessian = pos.x.transpose() * w.matrix().asDiagonal() * pos.x;  // negative Hessian / k
    const Eigen::VectorXd step = hessian.ldlt().solve(gradient);

    double scale = 1.0;
    Eigen::VectorXd trial_beta = beta + step;
    Eigen::VectorXd trial_eta = pos.x * trial_beta;
    double trial_ll = gamma_loglik(pos, trial_eta, shape);
    for (int halving = 0; halving < 40 && !(trial_ll >= ll); ++halving) {
      scale *= 0.5;
      trial_beta = beta + scale * step;
      trial_eta = pos.x * trial_beta;
      trial_ll = gamma_loglik(pos, trial_eta, shape);
    }
    if (!(trial_ll >= ll)) {
      // No ascent along the Newton direction: at the optimum to rounding.
      trial_beta = beta;
      trial_eta = eta;
    }
    beta = trial_beta;
    eta = trial_eta;
    shape = profile_shape(mean_deviance_term(pos, eta));
    const double new_ll = gamma_loglik(pos, eta, shape);
    fit.loglik_trace.push_back(bern + new_ll);
    const double change = std::abs(new_ll - ll);
    ll = new_ll;
    if (change <= options.relative_tolerance * std::max(1.0, std::abs(ll))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(ErrorKind::NonConvergence, "fit_zaga did not converge after " + std::to_string(iter) +
                                        " iterations (gradient norm " + format_double(shape * gradient.norm()) + ")");
  }

  fit.beta_mu = beta;
  fit.sigma_hat = 1.0 / std::sqrt(shape);
  fit.loglik = bern + ll;
  fit.iterations = iter;
  const Eigen::MatrixXd info = shape * (pos.x.transpose() * pos.x);
  fit.se_beta = info.inverse().diagonal().cwiseSqrt();
  return fit;
}

double zaga_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double sigma,
                   double nu) {
  const double k = 1.0 / (sigma * sigma);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0.0) {
      ll += std::log(nu);
      continue;
    }
    const double eta = x.row(i).dot(beta);
    ll += std::log1p(-nu) + k * std::log(k) - std::lgamma(k) + (k - 1.0) * std::log(y(i)) - k * eta -
          k * y(i) * std::exp(-eta);
  }
  return ll;
}

Eigen::VectorXd zaga_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                           double sigma, double nu) {
  const double k = 1.0 / (sigma * sigma);
  const Eigen::Index p = x.cols();
  Eigen::VectorXd score = Eigen::VectorXd::Zero(p + 2);
  double dk = 0.0;
  int n_zero = 0;
  int n_pos = 0;
  const double psi = boost::math::digamma(k);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0.0) {
      ++n_zero;
      continue;
    }
    ++n_pos;
    const double eta = x.row(i).dot(beta);
    const double ratio = y(i) * std::exp(-eta);
    score.head(p) += k * (ratio - 1.0) * x.row(i).transpose();
    dk += std::log(k) + 1.0 + std::log(ratio) - ratio - psi;
  }
  score(p) = dk * (-2.0 * k);  // dk / dlog(sigma) = -2k
  score(p + 1) = n_zero * (1.0 - nu) - n_pos * nu;
  return score;
}

namespace {

void check_columns(const ZagaFit& fit, const DesignMatrix& design) {
  if (design.cols() != fit.beta_mu.size()) {
    fail(ErrorKind::ColumnMismatch, "design has " + std::to_string(design.cols()) + " columns, fit expects " +
                                        std::to_string(fit.beta_mu.size()));
  }
  if (!design.names.empty() && !fit.names.empty() && design.names != fit.names) {
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      if (design.names[j] != fit.names[j]) {
        fail(ErrorKind::ColumnMismatch, "column " + std::to_string(j) + " is '" + design.names[j] + "', fit expects '" +
                                            fit.names[j] + "'");
      }
    }
  }
}

}  // namespace

ResponsePrediction predict_response(const ZagaFit& fit, const DesignMatrix& design) {
  check_columns(fit, design);
  ResponsePrediction out;
  out.mu = (design.x * fit.beta_mu).array().exp().matrix();
  out.mean = (1.0 - fit.nu_hat) * out.mu;
  return out;
}

double predict_mu(const ZagaFit& fit, const Eigen::RowVectorXd& row) {
  if (row.size() != fit.beta_mu.size()) {
    fail(ErrorKind::ColumnMismatch, "row has " + std::to_string(row.size()) + " columns, fit expects " +
                                        std::to_string(fit.beta_mu.size()));
  }
  return std::exp(row.dot(fit.beta_mu));
}

double point_forecast(const ZagaFit& fit, double mu, PointFunctional functional) {
  switch (functional) {
    case PointFunctional::mixture_mean: return (1.0 - fit.nu_hat) * mu;
    case PointFunctional::mu: return mu;
    case PointFunctional::median: {
      if (fit.nu_hat >= 0.5) return 0.0;
      const double k = 1.0 / (fit.sigma_hat * fit.sigma_hat);
      const double q = (0.5 - fit.nu_hat) / (1.0 - fit.nu_hat);
      return boost::math::gamma_p_inv(k, q) * fit.sigma_hat * fit.sigma_hat * mu;
    }
  }
  return mu;
}

double aic(const ZagaFit& fit) { return -2.0 * fit.loglik + 2.0 * static_cast<double>(fit.beta_mu.size() + 2); }

std::string serialize_fit(const ZagaFit& fit) {
  std::ostringstream out;
  out << "# lagcast zaga fit v1\n";
  out << "n_obs " << fit.n_obs << '\n';
  out << "n_zero " << fit.n_zero << '\n';
  out << "iterations " << fit.iterations << '\n';
  out << "nu_pinned " << (fit.nu_pinned ? 1 : 0) << '\n';
  out << "sigma " << format_double(fit.sigma_hat) << '\n';
  out << "nu " << format_double(fit.nu_hat) << '\n';
  out << "loglik " << format_double(fit.loglik) << '\n';
  for (Eigen::Index j = 0; j < fit.beta_mu.size(); ++j) {
    out << "beta " << fit.names[static_cast<std::size_t>(j)] << ' ' << format_double(fit.beta_mu(j)) << ' '
        << format_double(fit.se_beta.size() > j ? fit.se_beta(j) : 0.0) << '\n';
  }
  return out.str();
}

ZagaFit deserialize_fit(std::string_view text) {
  ZagaFit fit;
  std::vector<double> beta;
  std::vector<double> se;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    fail(ErrorKind::ParseError, "fit record line " + std::to_string(line_no) + ": " + why);
  };
  auto number = [&](const std::string& s) {
    const auto v = parse_double(s);
    if (!v) bad("not a number: '" + s + "'");
    return *v;
  };
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split(line, ' ');
    const auto& key = parts[0];
    if (key == "beta") {
      if (parts.size() != 4) bad("expected 'beta <name> <value> <se>'");
      fit.names.push_back(parts[1]);
      beta.push_back(number(parts[2]));
      se.push_back(number(parts[3]));
      continue;
    }
    if (parts.size() != 2) bad("expected '<key> <value>'");
    const double v = number(parts[1]);
    if (key == "n_obs") {
      fit.n_obs = static_cast<int>(v);
    } else if (key == "n_zero") {
      fit.n_zero = static_cast<int>(v);
    } else if (key == "iterations") {
      fit.iterations = static_cast<int>(v);
    } else if (key == "nu_pinned") {
      fit.nu_pinned = v != 0.0;
    } else if (key == "sigma") {
      fit.sigma_hat = v;
    } else if (key == "nu") {
      fit.nu_hat = v;
    } else if (key == "loglik") {
      fit.loglik = v;
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  if (beta.empty()) fail(ErrorKind::ParseError, "fit record has no coefficients");
  fit.beta_mu = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  fit.se_beta = Eigen::Map<const Eigen::VectorXd>(se.data(), static_cast<Eigen::Index>(se.size()));
  fit.n_params = static_cast<int>(beta.size()) + 2;
  return fit;
}

}  // namespace lagcast
