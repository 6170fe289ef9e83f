#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lagcast {

enum class BasisKind { linear, bspline };

struct BasisSpec {
  BasisKind kind = BasisKind::linear;
  int degree = 3;  // bspline only
  int df = 4;      // bspline only: number of basis functions, df = interior knots + degree + 1

  static BasisSpec linear() { return {}; }
  static BasisSpec bspline(int degree = 3, int df = 4) { return {BasisKind::bspline, degree, df}; }

  int interior_knot_count() const noexcept { return df - degree - 1; }
  // Throws Error(InvalidSpec).
  void validate() const;

  // "linear" or "bspline:<degree>:<df>"
  std::string to_string() const;
  static BasisSpec parse(std::string_view text);

  friend bool operator==(const BasisSpec& a, const BasisSpec& b) {
    return a.kind == b.kind && (a.kind == BasisKind::linear || (a.degree == b.degree && a.df == b.df));
  }
};

struct Boundary {
  double lo = 0.0;
  double hi = 1.0;
};

// Full B-spline basis (no column dropped) on the clamped knot vector
// [lo x (degree+1), knots..., hi x (degree+1)], evaluated with the
// Cox-de Boor triangular scheme. Rows sum to one. At x == hi the last
// function is 1.
// Errors: DegenerateBoundary (lo >= hi), KnotsOutOfRange (knots not strictly
// increasing inside (lo, hi)), InvalidSpec, InvalidParams (x outside [lo, hi]).
Eigen::MatrixXd bspline_basis(std::span<const double> x, const BasisSpec& spec, Boundary boundary,
                              std::span<const double> knots);

// Single column equal to x.
Eigen::MatrixXd linear_basis(std::span<const double> x);

// `count` interior knots at the type-7 quantiles k / (count + 1), k = 1..count.
std::vector<double> quantile_knots(std::span<const double> x, int count);

// Variable-space basis with its knots frozen from training values. B-spline
// inputs outside the training boundary are clamped to it.
class VariableBasis {
 public:
  VariableBasis() = default;

  static VariableBasis fit(std::span<const double> train, const BasisSpec& spec);
  static VariableBasis from_knots(const BasisSpec& spec, Boundary boundary, std::vector<double> knots);

  int dimension() const noexcept { return spec_.kind == BasisKind::linear ? 1 : spec_.df; }
  const BasisSpec& spec() const noexcept { return spec_; }
  const Boundary& boundary() const noexcept { return boundary_; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  // `clamped`, when given, is incremented once per clamped input.
  Eigen::MatrixXd evaluate(std::span<const double> x, std::size_t* clamped = nullptr) const;

 private:
  BasisSpec spec_;
  Boundary boundary_;
  std::vector<double> knots_;
};

// Lag-space basis evaluated on lags 0..max_lag. A linear lag basis is the
// pair of columns {1, lag} (just {1} when max_lag == 0); a B-spline lag basis
// uses boundary (0, max_lag) and equally spaced interior knots.
class LagBasis {
 public:
  LagBasis() = default;
  static LagBasis make(const BasisSpec& spec, int max_lag);

  const Eigen::MatrixXd& values() const noexcept { return values_; }  // (max_lag + 1) x dimension
  int dimension() const noexcept { return static_cast<int>(values_.cols()); }
  const BasisSpec& spec() const noexcept { return spec_; }

 private:
  BasisSpec spec_;
  Eigen::MatrixXd values_;
};

struct CrossBasis {
  Eigen::MatrixXd matrix;  // T x (v * l); rows before valid_from are NaN
  BasisSpec var_spec;
  BasisSpec lag_spec;
  int max_lag = 0;
  Eigen::Index valid_from = 0;
  int var_dim = 0;
  int lag_dim = 0;
  std::size_t clamped = 0;  // inputs clamped to the variable basis boundary
};

// Tensor-product exposure-lag basis. Column (j, k), stored at index
// j * lag_dim + k, holds sum_{l=0..L} B_j(x[t-l]) * C_k(l).
class CrossBasisBuilder {
 public:
  CrossBasisBuilder() = default;
  CrossBasisBuilder(VariableBasis var, LagBasis lag, int max_lag);

  // Freezes the variable basis on `train`. Errors: LagTooLarge, basis errors.
  static CrossBasisBuilder fit(std::span<const double> train, int max_lag, const BasisSpec& var_spec,
                               const BasisSpec& lag_spec);

  CrossBasis transform(std::span<const double> x) const;
  // Cross-basis row at index t of x; requires t >= max_lag.
  Eigen::RowVectorXd row(std::span<const double> x, std::size_t t, std::size_t* clamped = nullptr) const;

  int columns() const noexcept { return var_.dimension() * lag_.dimension(); }
  int max_lag() const noexcept { return max_lag_; }
  const VariableBasis& variable_basis() const noexcept { return var_; }
  const LagBasis& lag_basis() const noexcept { return lag_; }

  // "<prefix>.v<j>.l<k>", 1-based.
  std::vector<std::string> column_names(std::string_view prefix) const;

 private:
  Eigen::RowVectorXd combine(const Eigen::MatrixXd& window) const;

  VariableBasis var_;
  LagBasis lag_;
  int max_lag_ = 0;
};

CrossBasis cross_basis(std::span<const double> x, int max_lag, const BasisSpec& var_spec,
                       const BasisSpec& lag_spec);

}  // namespace lagcast
