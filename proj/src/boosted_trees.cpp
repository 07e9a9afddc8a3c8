#include "coxkl/boosted_trees.hpp"

#include <algorithm>
#include <numeric>

namespace coxkl {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best squared-error split over the given rows; rows are re-sorted per
// feature. Returns feature -1 when nothing beats the parent.
Split best_split(const Matrix& x, const Vector& residual,
                 std::vector<int>& rows, int min_leaf) {
  const int m = static_cast<int>(rows.size());
  double total = 0.0;
  for (int i : rows) total += residual[i];

  Split best;
  for (int f = 0; f < x.cols(); ++f) {
    std::sort(rows.begin(), rows.end(),
              [&](int a, int b) { return x(a, f) < x(b, f); });
    double left_sum = 0.0;
    for (int t = 0; t + 1 < m; ++t) {
      left_sum += residual[rows[t]];
      if (t + 1 < min_leaf || m - t - 1 < min_leaf) continue;
      if (x(rows[t], f) == x(rows[t + 1], f)) continue;
      const int nl = t + 1, nr = m - nl;
      const double right_sum = total - left_sum;
      const double gain =
          left_sum * left_sum / nl + right_sum * right_sum / nr -
          total * total / m;
      if (gain > best.gain) {
        best.feature = f;
        best.threshold = 0.5 * (x(rows[t], f) + x(rows[t + 1], f));
        best.gain = gain;
      }
    }
  }
  return best;
}

}  // namespace

double BoostedTrees::Tree::predict(
    const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = row[nodes[node].feature] <= nodes[node].threshold
               ? nodes[node].left
               : nodes[node].right;
  return nodes[node].value;
}

BoostedTrees BoostedTrees::fit(const Matrix& x, const Vector& y,
                               const BoostedTreesOptions& opts) {
  const int n = static_cast<int>(x.rows());
  if (n == 0 || y.size() != n)
    throw ValidationError("boosted_trees: bad input shapes");

  BoostedTrees model;
  model.learning_rate_ = opts.learning_rate;
  model.features_ = static_cast<int>(x.cols());
  model.base_ = y.mean();

  Vector prediction = Vector::Constant(n, model.base_);
  std::vector<int> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  for (int round = 0; round < opts.rounds; ++round) {
    const Vector residual = y - prediction;

    Tree tree;
    struct Work {
      int node;
      std::vector<int> rows;
      int depth;
    };
    tree.nodes.push_back({});
    std::vector<Work> stack{{0, all_rows, 0}};
    while (!stack.empty()) {
      Work work = std::move(stack.back());
      stack.pop_back();

      double mean = 0.0;
      for (int i : work.rows) mean += residual[i];
      mean /= static_cast<double>(work.rows.size());
      tree.nodes[work.node].value = mean;

      if (work.depth >= opts.max_depth ||
          static_cast<int>(work.rows.size()) < 2 * opts.min_leaf)
        continue;
      Split split = best_split(x, residual, work.rows, opts.min_leaf);
      if (split.feature < 0 || split.gain <= 1e-12) continue;

      std::vector<int> left, right;
      for (int i : work.rows)
        (x(i, split.feature) <= split.threshold ? left : right).push_back(i);

      const int left_id = static_cast<int>(tree.nodes.size());
      const int right_id = left_id + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      tree.nodes[work.node].feature = split.feature;
      tree.nodes[work.node].threshold = split.threshold;
      tree.nodes[work.node].left = left_id;
      tree.nodes[work.node].right = right_id;
      stack.push_back({right_id, std::move(right), work.depth + 1});
      stack.push_back({left_id, std::move(left), work.depth + 1});
    }

    for (int i = 0; i < n; ++i)
      prediction[i] += opts.learning_rate * tree.predict(x.row(i));
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

Vector BoostedTrees::predict(const Matrix& x) const {
  if (x.cols() != features_)
    throw ValidationError("boosted_trees: feature count mismatch");
  Vector out = Vector::Constant(x.rows(), base_);
  for (const Tree& tree : trees_)
    for (int i = 0; i < x.rows(); ++i)
      out[i] += learning_rate_ * tree.predict(x.row(i));
  return out;
}

}  // namespace coxkl
