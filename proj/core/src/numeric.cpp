#include "lagcast/numeric.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace lagcast {

std::vector<Eigen::Index> aliased_columns(const Eigen::MatrixXd& x, double rel_tol) {
  std::vector<Eigen::Index> aliased;
  Eigen::MatrixXd basis(x.rows(), x.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd v = x.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0 || !std::isfinite(norm0)) {
      aliased.push_back(j);
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index q = 0; q < kept; ++q) v -= basis.col(q).dot(v) * basis.col(q);
    }
    const double norm = v.norm();
    if (norm <= rel_tol * norm0) {
      aliased.push_back(j);
      continue;
    }
    basis.col(kept++) = v / norm;
  }
  return aliased;
}

Eigen::MatrixXd least_squares(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              std::span<const Eigen::Index> aliased) {
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (std::find(aliased.begin(), aliased.end(), j) == aliased.end()) keep.push_back(j);
  }
  Eigen::MatrixXd reduced(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) reduced.col(static_cast<Eigen::Index>(i)) = x.col(keep[i]);
  const Eigen::MatrixXd coef_reduced = reduced.householderQr().solve(y);
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(x.cols(), y.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) coef.row(keep[i]) = coef_reduced.row(static_cast<Eigen::Index>(i));
  return coef;
}

double quantile_type7(std::vector<double> values, double p) {
  assert(!values.empty());
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace lagcast
