#pragma once

#include <vector>

#include "coxkl/types.hpp"

namespace coxkl {

struct BoostedTreesOptions {
  int rounds = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 10;
};

/// Plain gradient-boosted regression trees (squared error, exact greedy
/// splits). Deterministic; small enough for simulation-scale external
/// model generation.
class BoostedTrees {
 public:
  static BoostedTrees fit(const Matrix& x, const Vector& y,
                          const BoostedTreesOptions& opts = {});

  Vector predict(const Matrix& x) const;
  int features() const { return features_; }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  };

  double base_ = 0.0;
  double learning_rate_ = 0.1;
  int features_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace coxkl
