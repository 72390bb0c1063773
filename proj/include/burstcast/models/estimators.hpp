#pragma once

// Learned parameters of each classifier family. Class ids are mapped to
// dense indices [0, K) by the caller; every predict_proba returns K values.

#include <cstdint>
#include <span>
#include <vector>

#include "burstcast/models/hyperparams.hpp"
#include "burstcast/models/matrix.hpp"
#include "burstcast/models/tree.hpp"

namespace burstcast {

struct TrainingData {
  const Matrix& X;
  std::span<const int> classes;     // dense class index per row
  std::span<const double> weights;  // per-row sample weight
  int n_classes;
};

struct NaiveBayesModel {
  std::vector<double> log_prior;            // K
  std::vector<std::vector<double>> mean;    // K × F
  std::vector<std::vector<double>> var;     // K × F, smoothing included

  static NaiveBayesModel fit(const TrainingData& d, const NaiveBayesParams& p);
  std::vector<double> predict_proba(std::span<const double> x) const;
  bool operator==(const NaiveBayesModel&) const = default;
};

// Multinomial logistic regression on standardized features.
struct LogisticModel {
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<std::vector<double>> coef;  // K × F (standardized space)
  std::vector<double> intercept;          // K
  int iterations = 0;
  bool converged = false;

  static LogisticModel fit(const TrainingData& d, const LogisticParams& p);
  std::vector<double> predict_proba(std::span<const double> x) const;
  bool operator==(const LogisticModel&) const = default;
};

struct TreeModel {
  DecisionTree tree;
  static TreeModel fit(const TrainingData& d, const TreeParams& p, std::uint64_t seed);
  std::vector<double> predict_proba(std::span<const double> x) const { return tree.leaf_value(x); }
  bool operator==(const TreeModel&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  int n_classes = 2;

  static ForestModel fit(const TrainingData& d, const ForestParams& p, std::uint64_t seed);
  // Fraction of trees voting for each class.
  std::vector<double> predict_proba(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

// One logistic booster per positive class: a single booster for two
// classes, one-vs-rest for more.
struct Booster {
  double base_margin = 0.0;
  std::vector<DecisionTree> trees;  // leaf values already include shrinkage
  std::vector<double> train_loss;   // mean log-loss after stage 0..n (index 0 = base)

  double margin(std::span<const double> x) const;
  bool operator==(const Booster&) const = default;
};

struct BoostModel {
  std::vector<Booster> boosters;
  int n_classes = 2;

  static BoostModel fit(const TrainingData& d, const BoostParams& p, std::uint64_t seed);
  std::vector<double> predict_proba(std::span<const double> x) const;
  bool operator==(const BoostModel&) const = default;
};

}  // namespace burstcast
