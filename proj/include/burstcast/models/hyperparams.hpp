#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace burstcast {

enum class Family { NaiveBayes, Logistic, Tree, Forest, Boosting };

std::string_view family_name(Family f) noexcept;  // gnb, logreg, tree, forest, gbt
Family parse_family(std::string_view name);

struct NaiveBayesParams {
  double variance_smoothing = 1e-9;
  bool operator==(const NaiveBayesParams&) const = default;
};

struct LogisticParams {
  double inverse_penalty = 1.0;  // C; larger means weaker L2 penalty
  int max_iterations = 15000;
  double tolerance = 1e-6;       // on the max-norm of the gradient
  bool operator==(const LogisticParams&) const = default;
};

// Unset optionals mean "no limit" (max_features: all features).
struct TreeParams {
  std::optional<int> max_depth;
  std::optional<int> max_leaf_nodes;
  int min_samples_split = 2;
  std::optional<int> max_features;
  bool operator==(const TreeParams&) const = default;
};

// Forest trees default to sqrt(n_features) candidates per split when
// tree.max_features is unset.
struct ForestParams {
  int n_trees = 100;
  TreeParams tree;
  bool operator==(const ForestParams&) const = default;
};

struct BoostParams {
  int n_estimators = 100;
  double learning_rate = 0.3;
  int max_depth = 6;
  double min_child_weight = 1.0;
  double gamma = 0.0;   // minimum split gain
  double lambda = 1.0;  // L2 on leaf weights
  double alpha = 0.0;   // L1 on leaf weights
  double colsample_ratio = 1.0;
  bool operator==(const BoostParams&) const = default;
};

struct Hyperparams {
  std::variant<NaiveBayesParams, LogisticParams, TreeParams, ForestParams, BoostParams> params;
  // Inverse-frequency sample weights; off by default.
  bool class_weighted = false;

  Family family() const noexcept { return static_cast<Family>(params.index()); }
  static Hyperparams defaults(Family f);
  bool operator==(const Hyperparams&) const = default;
};

// Throws InvalidHyperparams.
void validate(const Hyperparams& hp);

}  // namespace burstcast
