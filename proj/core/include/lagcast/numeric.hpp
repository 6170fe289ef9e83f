#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace lagcast {

// Columns of `x` that are linearly dependent on the columns before them,
// detected by ordered Gram-Schmidt with re-orthogonalization. A column is
// aliased when its residual norm is below `rel_tol` times its own norm
// (zero columns are always aliased). This matches the convention of keeping
// the earliest columns and dropping later redundant ones.
std::vector<Eigen::Index> aliased_columns(const Eigen::MatrixXd& x, double rel_tol = 1e-8);

// Least squares for every column of `y`; coefficients of `aliased` columns
// are fixed at zero and the remaining columns are solved by Householder QR.
Eigen::MatrixXd least_squares(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              std::span<const Eigen::Index> aliased = {});

// Type-7 sample quantile (linear interpolation between order statistics),
// p in [0, 1]. `values` must be non-empty.
double quantile_type7(std::vector<double> values, double p);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

}  // namespace lagcast
