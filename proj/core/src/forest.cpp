#include "lagcast/forest.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lagcast/error.hpp"
#include "lagcast/parallel.hpp"
#include "lagcast/random.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

int ForestConfig::resolved_mtry(int predictors) const noexcept {
  if (mtry > 0) return std::min(mtry, predictors);
  return std::max(1, (predictors + 2) / 3);
}

const TreeNode& RegressionTree::leaf_for(const double* row) const noexcept {
  const TreeNode* node = &nodes[0];
  while (!node->leaf()) {
    node = &nodes[static_cast<std::size_t>(row[node->column] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

double RegressionTree::predict(const double* row) const noexcept { return leaf_for(row).value; }

namespace {

// Row-major copy of the design with columns in canonical (name-sorted) order.
struct Canonical {
  std::vector<double> data;  // n x p row-major
  int n = 0;
  int p = 0;
  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * static_cast<std::size_t>(p) + static_cast<std::size_t>(col)]; }
};

std::vector<int> canonical_order(const std::vector<std::string>& names, Eigen::Index width) {
  std::vector<int> order(static_cast<std::size_t>(width));
  std::iota(order.begin(), order.end(), 0);
  if (static_cast<Eigen::Index>(names.size()) == width) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return names[static_cast<std::size_t>(a)] < names[static_cast<std::size_t>(b)]; });
  }
  return order;
}

Canonical canonicalize(const Eigen::MatrixXd& x, const std::vector<int>& order) {
  Canonical c;
  c.n = static_cast<int>(x.rows());
  c.p = static_cast<int>(order.size());
  c.data.resize(static_cast<std::size_t>(c.n) * static_cast<std::size_t>(c.p));
  for (int i = 0; i < c.n; ++i) {
    for (int j = 0; j < c.p; ++j) {
      c.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(c.p) + static_cast<std::size_t>(j)] =
          x(i, order[static_cast<std::size_t>(j)]);
    }
  }
  return c;
}

// Row indices of each column sorted by (value, row); shared by all trees.
struct SortedColumns {
  std::vector<std::vector<int>> order;

  explicit SortedColumns(const Canonical& x) : order(static_cast<std::size_t>(x.p)) {
    for (int j = 0; j < x.p; ++j) {
      auto& o = order[static_cast<std::size_t>(j)];
      o.resize(static_cast<std::size_t>(x.n));
      std::iota(o.begin(), o.end(), 0);
      std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return x.at(a, j) < x.at(b, j); });
    }
  }
};

// Grows one tree on bootstrap multiplicities. A node holds its distinct rows;
// large nodes scan the presorted column orders, small ones sort locally.
class TreeBuilder {
 public:
  TreeBuilder(const Canonical& x, const SortedColumns& sorted, const Eigen::VectorXd& y, const ForestConfig& config,
              int mtry, Rng& rng)
      : x_(x), sorted_(sorted), y_(y), config_(config), mtry_(mtry), rng_(rng),
        node_of_(static_cast<std::size_t>(x.n), -1) {}

  RegressionTree build(const std::vector<int>& weight) {
    weight_ = &weight;
    RegressionTree tree;
    tree_ = &tree;
    std::vector<int> rows;
    for (int r = 0; r < x_.n; ++r) {
      if (weight[static_cast<std::size_t>(r)] > 0) rows.push_back(r);
    }
    grow(rows);
    return tree;
  }

 private:
  struct Split {
    int column = -1;
    double threshold = 0.0;
    double child_sse = std::numeric_limits<double>::infinity();
  };

  // Running weighted sums of the centered response along one column.
  struct Scan {
    double mean;
    double total;
    double total_sq;
    double count;
    int min_size;
    double left_sum = 0.0;
    double left_sq = 0.0;
    double left_n = 0.0;
    bool have_prev = false;
    double prev_x = 0.0;

    void visit(double xv, double yc, double w, int col, Split& best) {
      if (have_prev && xv != prev_x && left_n >= min_size && count - left_n >= min_size) {
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double right_n = count - left_n;
        const double sse = std::max(0.0, left_sq - left_sum * left_sum / left_n) +
                           std::max(0.0, right_sq - right_sum * right_sum / right_n);
        if (sse < best.child_sse) {
          double mid = prev_x + (xv - prev_x) / 2.0;
          if (!(mid < xv)) mid = prev_x;
          best = {col, mid, sse};
        }
      }
      left_sum += w * yc;
      left_sq += w * yc * yc;
      left_n += w;
      prev_x = xv;
      have_prev = true;
    }
  };

  double w(int r) const { return static_cast<double>((*weight_)[static_cast<std::size_t>(r)]); }

  int grow(std::vector<int>& rows) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    double count = 0.0;
    double mean = 0.0;
    for (int r : rows) {
      count += w(r);
      mean += w(r) * y_(r);
    }
    mean /= count;
    double sse = 0.0;
    for (int r : rows) sse += w(r) * (y_(r) - mean) * (y_(r) - mean);
    {
      auto& node = tree_->nodes[static_cast<std::size_t>(id)];
      node.value = mean;
      node.count = static_cast<int>(count);
    }
    if (count < 2.0 * config_.min_node_size || sse <= 0.0) return id;

    for (int r : rows) node_of_[static_cast<std::size_t>(r)] = id;
    const Split split = best_split(rows, id, mean, count, sse);
    if (split.column < 0) return id;
    // Weighted child variance never exceeds the parent's.
    assert(split.child_sse <= sse);

    std::vector<int> left;
    std::vector<int> right;
    for (int r : rows) (x_.at(r, split.column) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left);
    const int rgt = grow(right);
    auto& node = tree_->nodes[static_cast<std::size_t>(id)];
    node.column = split.column;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

  Split best_split(const std::vector<int>& rows, int id, double mean, double count, double parent_sse) {
    // mtry columns without replacement (partial Fisher-Yates), scanned in
    // ascending order for deterministic tie-breaking.
    std::vector<int> columns(static_cast<std::size_t>(x_.p));
    std::iota(columns.begin(), columns.end(), 0);
    for (int i = 0; i < mtry_; ++i) {
      const auto j = static_cast<std::size_t>(i) + uniform_index(rng_, static_cast<std::uint64_t>(x_.p - i));
      std::swap(columns[static_cast<std::size_t>(i)], columns[j]);
    }
    columns.resize(static_cast<std::size_t>(mtry_));
    std::sort(columns.begin(), columns.end());

    double total = 0.0;
    double total_sq = 0.0;
    for (int r : rows) {
      const double yc = y_(r) - mean;
      total += w(r) * yc;
      total_sq += w(r) * yc * yc;
    }
    const bool local = rows.size() * 8 < static_cast<std::size_t>(x_.n);
    std::vector<int> local_rows;
    Split best;
    for (int col : columns) {
      Scan scan{mean, total, total_sq, count, config_.min_node_size};
      if (local) {
        local_rows = rows;
        std::sort(local_rows.begin(), local_rows.end(), [&](int a, int b) {
          const double xa = x_.at(a, col);
          const double xb = x_.at(b, col);
          return xa < xb || (xa == xb && a < b);
        });
        for (int r : local_rows) scan.visit(x_.at(r, col), y_(r) - mean, w(r), col, best);
      } else {
        for (int r : sorted_.order[static_cast<std::size_t>(col)]) {
          if (node_of_[static_cast<std::size_t>(r)] != id) continue;
          scan.visit(x_.at(r, col), y_(r) - mean, w(r), col, best);
        }
      }
    }
    if (best.column >= 0 && !(best.child_sse < parent_sse * (1.0 - 1e-12))) return {};
    return best;
  }

  const Canonical& x_;
  const SortedColumns& sorted_;
  const Eigen::VectorXd& y_;
  const ForestConfig& config_;
  int mtry_;
  Rng& rng_;
  std::vector<int> node_of_;
  const std::vector<int>* weight_ = nullptr;
  RegressionTree* tree_ = nullptr;
};

}  // namespace

ForestModel fit_forest(const DesignMatrix& design, const Eigen::VectorXd& y, const ForestConfig& config) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n < 2 || p < 1) fail(ErrorKind::EmptyDesign, "forest needs at least 2 rows and 1 column");
  if (y.size() != n) fail(ErrorKind::WidthMismatch, "response length differs from design rows");
  if (!design.x.allFinite() || !y.allFinite()) fail(ErrorKind::EmptyDesign, "forest inputs must be finite");
  if (config.n_trees < 1 || config.min_node_size < 1 || config.mtry < 0 || config.mtry > p) {
    fail(ErrorKind::InvalidSpec, "invalid forest configuration");
  }

  ForestModel model;
  model.config = config;
  model.n_train = static_cast<int>(n);
  model.input_names = design.names;
  const auto order = canonical_order(design.names, p);
  for (int j : order) {
    model.feature_names.push_back(design.names.empty() ? "x" + std::to_string(j)
                                                       : design.names[static_cast<std::size_t>(j)]);
  }
  if (design.names.empty()) {
    model.input_names = model.feature_names;
  }
  model.degenerate_response = (y.array() == y(0)).all();

  const Canonical x = canonicalize(design.x, order);
  const SortedColumns sorted(x);
  const int mtry = config.resolved_mtry(static_cast<int>(p));
  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(static_cast<std::size_t>(config.n_trees), [&](std::size_t t) {
    Rng rng(derive_seed(config.seed, t));
    std::vector<int> weight(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = config.bootstrap ? uniform_index(rng, static_cast<std::uint64_t>(n)) : static_cast<std::uint64_t>(i);
      ++weight[static_cast<std::size_t>(r)];
    }
    TreeBuilder builder(x, sorted, y, config, mtry, rng);
    RegressionTree tree = builder.build(weight);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weight[static_cast<std::size_t>(i)] == 0) tree.oob_rows.push_back(static_cast<int>(i));
    }
    model.trees[t] = std::move(tree);
  });
  return model;
}

namespace {

// Maps prediction rows into the canonical column order of the model.
Canonical align_rows(const ForestModel& model, const DesignMatrix& rows) {
  const auto p = static_cast<Eigen::Index>(model.feature_names.size());
  if (rows.cols() != p) {
    fail(ErrorKind::WidthMismatch,
         "rows have " + std::to_string(rows.cols()) + " columns, model expects " + std::to_string(p));
  }
  std::vector<int> order(static_cast<std::size_t>(p));
  const auto& names = rows.names.empty() ? model.input_names : rows.names;
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& want = model.feature_names[static_cast<std::size_t>(j)];
    const auto it = std::find(names.begin(), names.end(), want);
    if (it == names.end()) fail(ErrorKind::WidthMismatch, "prediction rows lack column '" + want + "'");
    order[static_cast<std::size_t>(j)] = static_cast<int>(it - names.begin());
  }
  return canonicalize(rows.x, order);
}

}  // namespace

Eigen::VectorXd predict_forest(const ForestModel& model, const DesignMatrix& rows) {
  const Canonical x = align_rows(model, rows);
  Eigen::VectorXd out(x.n);
  for (int i = 0; i < x.n; ++i) {
    const double* row = &x.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(x.p)];
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    out(i) = sum / static_cast<double>(model.trees.size());
  }
  return out;
}

double predict_forest_row(const ForestModel& model, const Eigen::RowVectorXd& row) {
  DesignMatrix d;
  d.x = row;
  return predict_forest(model, d)(0);
}

Eigen::VectorXd oob_predictions(const ForestModel& model, const DesignMatrix& design) {
  const Canonical x = align_rows(model, design);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.n);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(x.n);
  for (const auto& tree : model.trees) {
    for (int r : tree.oob_rows) {
      if (r >= x.n) continue;
      sum(r) += tree.predict(&x.data[static_cast<std::size_t>(r) * static_cast<std::size_t>(x.p)]);
      ++count(r);
    }
  }
  Eigen::VectorXd out(x.n);
  for (int i = 0; i < x.n; ++i) {
    out(i) = count(i) > 0 ? sum(i) / count(i) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double oob_rmse(const ForestModel& model, const DesignMatrix& design, const Eigen::VectorXd& y) {
  if (y.size() != design.rows()) fail(ErrorKind::WidthMismatch, "response length differs from design rows");
  const Eigen::VectorXd pred = oob_predictions(model, design);
  double ss = 0.0;
  int used = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (std::isnan(pred(i))) continue;
    ss += (y(i) - pred(i)) * (y(i) - pred(i));
    ++used;
  }
  if (used == 0) fail(ErrorKind::NoOobRows, "no row is out of bag for any tree");
  return std::sqrt(ss / used);
}

std::string serialize_forest(const ForestModel& model) {
  std::ostringstream out;
  out << "# lagcast forest v1\n";
  out << "trees " << model.trees.size() << '\n';
  out << "mtry " << model.config.mtry << '\n';
  out << "min_node_size " << model.config.min_node_size << '\n';
  out << "seed " << model.config.seed << '\n';
  out << "bootstrap " << (model.config.bootstrap ? 1 : 0) << '\n';
  out << "n_train " << model.n_train << '\n';
  for (const auto& name : model.input_names) out << "input " << name << '\n';
  for (const auto& name : model.feature_names) out << "feature " << name << '\n';
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    out << "tree " << t << '\n';
    out << "oob";
    for (int r : tree.oob_rows) out << ' ' << r;
    out << '\n';
    // Pre-order traversal.
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const auto& node = tree.nodes[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (node.leaf()) {
        out << "L " << format_double(node.value) << ' ' << node.count << '\n';
      } else {
        out << "S " << node.column << ' ' << format_double(node.threshold) << ' ' << format_double(node.value) << ' '
            << node.count << '\n';
        stack.push_back(node.right);
        stack.push_back(node.left);
      }
    }
  }
  return out.str();
}

namespace {

class ForestReader {
 public:
  explicit ForestReader(std::string_view text) : lines_(split(text, '\n')) {}

  ForestModel read() {
    ForestModel model;
    std::size_t n_trees = 0;
    while (next()) {
      const auto& key = parts_[0];
      if (key == "tree") {
        read_tree(model);
        continue;
      }
      if (key == "input") {
        model.input_names.push_back(arg(1));
      } else if (key == "feature") {
        model.feature_names.push_back(arg(1));
      } else if (key == "trees") {
        n_trees = static_cast<std::size_t>(integer(1));
      } else if (key == "mtry") {
        model.config.mtry = static_cast<int>(integer(1));
      } else if (key == "min_node_size") {
        model.config.min_node_size = static_cast<int>(integer(1));
      } else if (key == "seed") {
        model.config.seed = static_cast<std::uint64_t>(std::stoull(arg(1)));
      } else if (key == "bootstrap") {
        model.config.bootstrap = integer(1) != 0;
      } else if (key == "n_train") {
        model.n_train = static_cast<int>(integer(1));
      } else {
        bad("unknown key '" + key + "'");
      }
    }
    if (model.trees.size() != n_trees || n_trees == 0) bad("tree count mismatch");
    model.config.n_trees = static_cast<int>(n_trees);
    return model;
  }

 private:
  bool next() {
    while (pos_ < lines_.size()) {
      const auto line = trim(lines_[pos_++]);
      if (line.empty() || line.front() == '#') continue;
      parts_ = split(line, ' ');
      return true;
    }
    return false;
  }

  [[noreturn]] void bad(const std::string& why) const {
    fail(ErrorKind::ParseError, "forest record line " + std::to_string(pos_) + ": " + why);
  }

  const std::string& arg(std::size_t i) const {
    if (i >= parts_.size()) bad("missing field");
    return parts_[i];
  }
  std::int64_t integer(std::size_t i) const {
    const auto v = parse_int(arg(i));
    if (!v) bad("not an integer: '" + arg(i) + "'");
    return *v;
  }
  double number(std::size_t i) const {
    const auto v = parse_double(arg(i));
    if (!v) bad("not a number: '" + arg(i) + "'");
    return *v;
  }

  void read_tree(ForestModel& model) {
    RegressionTree tree;
    if (!next() || parts_[0] != "oob") bad("expected oob line");
    for (std::size_t i = 1; i < parts_.size(); ++i) tree.oob_rows.push_back(static_cast<int>(integer(i)));
    read_node(tree);
    model.trees.push_back(std::move(tree));
  }

  int read_node(RegressionTree& tree) {
    if (!next()) bad("truncated tree");
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (parts_[0] == "L") {
      auto& node = tree.nodes.back();
      node.value = number(1);
      node.count = static_cast<int>(integer(2));
      return id;
    }
    if (parts_[0] != "S") bad("expected S or L node");
    const int column = static_cast<int>(integer(1));
    const double threshold = number(2);
    const double value = number(3);
    const int count = static_cast<int>(integer(4));
    const int left = read_node(tree);
    const int right = read_node(tree);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.column = column;
    node.threshold = threshold;
    node.value = value;
    node.count = count;
    node.left = left;
    node.right = right;
    return id;
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
  std::vector<std::string> parts_;
};

}  // namespace

ForestModel deserialize_forest(std::string_view text) { return ForestReader(text).read(); }

}  // namespace lagcast
