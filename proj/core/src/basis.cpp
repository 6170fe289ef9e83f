#include "lagcast/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lagcast/error.hpp"
#include "lagcast/numeric.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

void BasisSpec::validate() const {
  if (kind == BasisKind::linear) return;
  if (degree < 1) fail(ErrorKind::InvalidSpec, "bspline degree must be >= 1, got " + std::to_string(degree));
  if (df < degree + 1) {
    fail(ErrorKind::InvalidSpec,
         "bspline df must be >= degree + 1 (" + std::to_string(degree + 1) + "), got " + std::to_string(df));
  }
}

std::string BasisSpec::to_string() const {
  if (kind == BasisKind::linear) return "linear";
  return "bspline:" + std::to_string(degree) + ":" + std::to_string(df);
}

BasisSpec BasisSpec::parse(std::string_view text) {
  text = trim(text);
  if (text == "linear") return linear();
  const auto parts = split(text, ':');
  if (parts.empty() || parts[0] != "bspline" || parts.size() > 3) {
    fail(ErrorKind::InvalidSpec, "basis must be 'linear' or 'bspline[:degree[:df]]', got '" + std::string(text) + "'");
  }
  BasisSpec spec = bspline();
  if (parts.size() >= 2) {
    const auto d = parse_int(parts[1]);
    if (!d) fail(ErrorKind::InvalidSpec, "bad bspline degree '" + parts[1] + "'");
    spec.degree = static_cast<int>(*d);
    spec.df = spec.degree + 1;
  }
  if (parts.size() == 3) {
    const auto df = parse_int(parts[2]);
    if (!df) fail(ErrorKind::InvalidSpec, "bad bspline df '" + parts[2] + "'");
    spec.df = static_cast<int>(*df);
  }
  spec.validate();
  return spec;
}

namespace {

void check_knots(const BasisSpec& spec, Boundary b, std::span<const double> knots) {
  spec.validate();
  if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
    fail(ErrorKind::DegenerateBoundary,
         "boundary (" + format_double(b.lo) + ", " + format_double(b.hi) + ") is empty");
  }
  if (static_cast<int>(knots.size()) != spec.interior_knot_count()) {
    fail(ErrorKind::InvalidSpec, "bspline degree " + std::to_string(spec.degree) + " df " + std::to_string(spec.df) +
                                     " needs " + std::to_string(spec.interior_knot_count()) + " interior knots, got " +
                                     std::to_string(knots.size()));
  }
  double prev = b.lo;
  for (double k : knots) {
    if (!(k > prev) || !(k < b.hi)) {
      fail(ErrorKind::KnotsOutOfRange, "interior knot " + format_double(k) +
                                           " not strictly increasing inside (" + format_double(b.lo) + ", " +
                                           format_double(b.hi) + ")");
    }
    prev = k;
  }
}

// Clamped knot vector and the non-zero basis functions at x, via the
// triangular Cox-de Boor scheme.
class KnotVector {
 public:
  KnotVector(int degree, Boundary b, std::span<const double> interior) : degree_(degree) {
    knots_.assign(static_cast<std::size_t>(degree + 1), b.lo);
    knots_.insert(knots_.end(), interior.begin(), interior.end());
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), b.hi);
    n_basis_ = static_cast<int>(knots_.size()) - degree - 1;
  }

  int n_basis() const { return n_basis_; }

  int span(double x) const {
    if (x >= knots_[static_cast<std::size_t>(n_basis_)]) return n_basis_ - 1;
    int lo = degree_;
    int hi = n_basis_;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (x < knots_[static_cast<std::size_t>(mid)]) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return lo;
  }

  // Writes the degree+1 non-zero values N_{s-degree..s}(x) into out.
  void nonzero(int s, double x, std::vector<double>& out, std::vector<double>& left,
               std::vector<double>& right) const {
    const auto p = static_cast<std::size_t>(degree_);
    out.assign(p + 1, 0.0);
    left.assign(p + 1, 0.0);
    right.assign(p + 1, 0.0);
    out[0] = 1.0;
    const auto su = static_cast<std::size_t>(s);
    for (std::size_t j = 1; j <= p; ++j) {
      left[j] = x - knots_[su + 1 - j];
      right[j] = knots_[su + j] - x;
      double saved = 0.0;
      for (std::size_t r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double temp = denom == 0.0 ? 0.0 : out[r] / denom;
        out[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      out[j] = saved;
    }
  }

 private:
  int degree_;
  int n_basis_ = 0;
  std::vector<double> knots_;
};

Eigen::MatrixXd evaluate_bspline(std::span<const double> x, int degree, Boundary b, std::span<const double> knots) {
  const KnotVector kv(degree, b, knots);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), kv.n_basis());
  std::vector<double> values;
  std::vector<double> left;
  std::vector<double> right;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int s = kv.span(x[i]);
    kv.nonzero(s, x[i], values, left, right);
    for (int r = 0; r <= degree; ++r) out(static_cast<Eigen::Index>(i), s - degree + r) = values[static_cast<std::size_t>(r)];
  }
  return out;
}

}  // namespace

Eigen::MatrixXd bspline_basis(std::span<const double> x, const BasisSpec& spec, Boundary boundary,
                              std::span<const double> knots) {
  if (spec.kind != BasisKind::bspline) fail(ErrorKind::InvalidSpec, "bspline_basis called with a linear spec");
  check_knots(spec, boundary, knots);
  for (double v : x) {
    if (!(v >= boundary.lo && v <= boundary.hi)) {
      fail(ErrorKind::InvalidParams, "value " + format_double(v) + " outside boundary (" + format_double(boundary.lo) +
                                         ", " + format_double(boundary.hi) + ")");
    }
  }
  return evaluate_bspline(x, spec.degree, boundary, knots);
}

Eigen::MatrixXd linear_basis(std::span<const double> x) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = x[i];
  return out;
}

std::vector<double> quantile_knots(std::span<const double> x, int count) {
  std::vector<double> knots;
  if (count <= 0) return knots;
  const std::vector<double> values(x.begin(), x.end());
  for (int k = 1; k <= count; ++k) knots.push_back(quantile_type7(values, static_cast<double>(k) / (count + 1)));
  return knots;
}

VariableBasis VariableBasis::fit(std::span<const double> train, const BasisSpec& spec) {
  spec.validate();
  VariableBasis out;
  out.spec_ = spec;
  if (spec.kind == BasisKind::linear) return out;
  if (train.empty()) fail(ErrorKind::DegenerateBoundary, "no training values for bspline boundary");
  const auto [mn, mx] = std::minmax_element(train.begin(), train.end());
  out.boundary_ = Boundary{*mn, *mx};
  out.knots_ = quantile_knots(train, spec.interior_knot_count());
  check_knots(spec, out.boundary_, out.knots_);
  return out;
}

VariableBasis VariableBasis::from_knots(const BasisSpec& spec, Boundary boundary, std::vector<double> knots) {
  VariableBasis out;
  out.spec_ = spec;
  if (spec.kind == BasisKind::bspline) {
    check_knots(spec, boundary, knots);
    out.boundary_ = boundary;
    out.knots_ = std::move(knots);
  } else {
    spec.validate();
  }
  return out;
}

Eigen::MatrixXd VariableBasis::evaluate(std::span<const double> x, std::size_t* clamped) const {
  if (spec_.kind == BasisKind::linear) return linear_basis(x);
  std::vector<double> xs(x.begin(), x.end());
  for (double& v : xs) {
    if (v < boundary_.lo || v > boundary_.hi) {
      v = std::clamp(v, boundary_.lo, boundary_.hi);
      if (clamped) ++*clamped;
    }
  }
  return evaluate_bspline(xs, spec_.degree, boundary_, knots_);
}

LagBasis LagBasis::make(const BasisSpec& spec, int max_lag) {
  spec.validate();
  if (max_lag < 0) fail(ErrorKind::LagTooLarge, "max lag must be non-negative");
  LagBasis out;
  out.spec_ = spec;
  const Eigen::Index n = max_lag + 1;
  if (spec.kind == BasisKind::linear) {
    if (max_lag == 0) {
      out.values_ = Eigen::MatrixXd::Ones(1, 1);
    } else {
      out.values_.resize(n, 2);
      for (Eigen::Index l = 0; l < n; ++l) {
        out.values_(l, 0) = 1.0;
        out.values_(l, 1) = static_cast<double>(l);
      }
    }
    return out;
  }
  std::vector<double> lags(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < n; ++l) lags[static_cast<std::size_t>(l)] = static_cast<double>(l);
  const Boundary b{0.0, static_cast<double>(max_lag)};
  std::vector<double> knots;
  const int count = spec.interior_knot_count();
  for (int k = 1; k <= count; ++k) knots.push_back(b.hi * k / (count + 1));
  out.values_ = bspline_basis(lags, spec, b, knots);
  return out;
}

CrossBasisBuilder::CrossBasisBuilder(VariableBasis var, LagBasis lag, int max_lag)
    : var_(std::move(var)), lag_(std::move(lag)), max_lag_(max_lag) {}

CrossBasisBuilder CrossBasisBuilder::fit(std::span<const double> train, int max_lag, const BasisSpec& var_spec,
                                         const BasisSpec& lag_spec) {
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= train.size()) {
    fail(ErrorKind::LagTooLarge,
         "max lag " + std::to_string(max_lag) + " requires more than " + std::to_string(train.size()) + " observations");
  }
  return CrossBasisBuilder(VariableBasis::fit(train, var_spec), LagBasis::make(lag_spec, max_lag), max_lag);
}

CrossBasis CrossBasisBuilder::transform(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (max_lag_ >= n) {
    fail(ErrorKind::LagTooLarge,
         "max lag " + std::to_string(max_lag_) + " requires more than " + std::to_string(n) + " observations");
  }
  CrossBasis out;
  out.var_spec = var_.spec();
  out.lag_spec = lag_.spec();
  out.max_lag = max_lag_;
  out.valid_from = max_lag_;
  out.var_dim = var_.dimension();
  out.lag_dim = lag_.dimension();
  const Eigen::MatrixXd b = var_.evaluate(x, &out.clamped);
  out.matrix.setConstant(n, columns(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index t = max_lag_; t < n; ++t) {
    out.matrix.row(t) = combine(b.middleRows(t - max_lag_, max_lag_ + 1));
  }
  return out;
}

Eigen::RowVectorXd CrossBasisBuilder::combine(const Eigen::MatrixXd& window) const {
  // window rows are oldest first: row max_lag - l holds lag l.
  const Eigen::MatrixXd& c = lag_.values();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(var_.dimension(), lag_.dimension());
  for (Eigen::Index l = 0; l <= max_lag_; ++l) m += window.row(max_lag_ - l).transpose() * c.row(l);
  Eigen::RowVectorXd out(columns());
  const Eigen::Index ld = lag_.dimension();
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    for (Eigen::Index k = 0; k < ld; ++k) out(j * ld + k) = m(j, k);
  }
  return out;
}

Eigen::RowVectorXd CrossBasisBuilder::row(std::span<const double> x, std::size_t t, std::size_t* clamped) const {
  if (t >= x.size() || t < static_cast<std::size_t>(max_lag_)) {
    fail(ErrorKind::LagTooLarge, "row " + std::to_string(t) + " lacks " + std::to_string(max_lag_) + " lags");
  }
  const auto window_x = x.subspan(t - static_cast<std::size_t>(max_lag_), static_cast<std::size_t>(max_lag_) + 1);
  return combine(var_.evaluate(window_x, clamped));
}

std::vector<std::string> CrossBasisBuilder::column_names(std::string_view prefix) const {
  std::vector<std::string> names;
  for (int j = 0; j < var_.dimension(); ++j) {
    for (int k = 0; k < lag_.dimension(); ++k) {
      names.push_back(std::string(prefix) + ".v" + std::to_string(j + 1) + ".l" + std::to_string(k + 1));
    }
  }
  return names;
}

CrossBasis cross_basis(std::span<const double> x, int max_lag, const BasisSpec& var_spec,
                       const BasisSpec& lag_spec) {
  return CrossBasisBuilder::fit(x, max_lag, var_spec, lag_spec).transform(x);
}

}  // namespace lagcast
