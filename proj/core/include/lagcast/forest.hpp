#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/gamlss.hpp"

namespace lagcast {

struct ForestConfig {
  int n_trees = 500;
  int mtry = 0;  // 0 = ceil(p / 3)
  int min_node_size = 5;
  std::uint64_t seed = 1;
  bool bootstrap = true;  // false: every tree sees the full sample once

  int resolved_mtry(int predictors) const noexcept;
};

struct TreeNode {
  int column = -1;  // -1 for a leaf
  double threshold = 0.0;  // rows with x <= threshold go left
  double value = 0.0;      // leaf mean
  int left = -1;
  int right = -1;
  int count = 0;  // in-bag rows reaching the node (with multiplicity)

  bool leaf() const noexcept { return column < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> oob_rows;    // training rows not drawn for this tree

  double predict(const double* row) const noexcept;
  const TreeNode& leaf_for(const double* row) const noexcept;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestConfig config;
  // Training column names in the order the trees index them (sorted), and
  // for each of those the column's position in the training design.
  std::vector<std::string> feature_names;
  std::vector<std::string> input_names;  // training design order
  int n_train = 0;
  bool degenerate_response = false;  // constant y: all trees are single leaves
};

// Bagged variance-reduction regression trees. Each tree is fit on a
// bootstrap sample drawn from a generator seeded by derive_seed(seed, tree),
// so parallel and serial builds agree bit for bit. Split search is exact
// over midpoints of consecutive distinct values; ties go to the lowest
// column index, then the smallest threshold. Columns are canonicalized by
// name, so permuting design columns together with their names leaves the
// model unchanged.
// Errors: EmptyDesign, WidthMismatch, InvalidSpec.
ForestModel fit_forest(const DesignMatrix& design, const Eigen::VectorXd& y, const ForestConfig& config = {});

// Rows are matched to the model by column name when the design carries
// names; otherwise by position in the training order. Errors: WidthMismatch.
Eigen::VectorXd predict_forest(const ForestModel& model, const DesignMatrix& rows);
double predict_forest_row(const ForestModel& model, const Eigen::RowVectorXd& row);

// Per-row mean over trees for which the row is out of bag; NaN when none.
Eigen::VectorXd oob_predictions(const ForestModel& model, const DesignMatrix& design);
// Errors: NoOobRows.
double oob_rmse(const ForestModel& model, const DesignMatrix& design, const Eigen::VectorXd& y);

// Depth-first text encoding: "S <column> <threshold>" for splits and
// "L <value>" for leaves, 17 significant digits.
std::string serialize_forest(const ForestModel& model);
ForestModel deserialize_forest(std::string_view text);

}  // namespace lagcast
