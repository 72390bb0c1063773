#pragma once

// Binary decision trees shared by the CART classifier, the random forest
// and the boosted ensembles. A sample goes left when x[feature] <= threshold.

#include <cstdint>
#include <span>
#include <vector>

#include "burstcast/models/hyperparams.hpp"
#include "burstcast/models/matrix.hpp"
#include "burstcast/rng.hpp"

namespace burstcast {

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> value;  // class distribution, or a single leaf score

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_index(std::span<const double> x) const noexcept;
  const std::vector<double>& leaf_value(std::span<const double> x) const noexcept {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
  }
  std::size_t leaf_count() const noexcept;
  int depth() const noexcept;
  bool operator==(const DecisionTree&) const = default;
};

// Per-feature sample orderings of a design matrix, computed once and reused
// by every tree grown on the same data.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& X);
  const std::vector<std::uint32_t>& order(std::size_t feature) const { return order_[feature]; }
  std::size_t features() const noexcept { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

// Gini CART. `classes` holds class indices in [0, n_classes); samples with
// zero weight are ignored. Ties between candidate splits go to the lowest
// feature index, then the lowest threshold.
DecisionTree grow_cart(const Matrix& X, const SortedColumns& sorted, std::span<const int> classes,
                       std::span<const double> weights, int n_classes, const TreeParams& params,
                       int features_per_split, Rng& rng);

// Second-order regression tree on gradients/hessians (leaf value size 1,
// unscaled by the learning rate). `features` restricts candidate columns.
DecisionTree grow_boost_tree(const Matrix& X, const SortedColumns& sorted, std::span<const double> grad,
                             std::span<const double> hess, const BoostParams& params,
                             std::span<const std::size_t> features);

}  // namespace burstcast
