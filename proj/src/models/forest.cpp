#include <algorithm>
#include <cmath>
#include <thread>

#include "burstcast/models/estimators.hpp"

namespace burstcast {

TreeModel TreeModel::fit(const TrainingData& d, const TreeParams& p, std::uint64_t seed) {
  const SortedColumns sorted(d.X);
  Rng rng(seed);
  const int per_split = p.max_features ? std::min(*p.max_features, static_cast<int>(d.X.cols()))
                                       : static_cast<int>(d.X.cols());
  return TreeModel{grow_cart(d.X, sorted, d.classes, d.weights, d.n_classes, p, per_split, rng)};
}

ForestModel ForestModel::fit(const TrainingData& d, const ForestParams& p, std::uint64_t seed) {
  const SortedColumns sorted(d.X);
  const auto F = static_cast<int>(d.X.cols());
  const int per_split = p.tree.max_features
                            ? std::min(*p.tree.max_features, F)
                            : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(F)))));
  ForestModel m;
  m.n_classes = d.n_classes;
  m.trees.resize(static_cast<std::size_t>(p.n_trees));
  const std::size_t n = d.X.rows();

  auto grow = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> w(n, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) w[static_cast<std::size_t>(rng.below(n))] += 1.0;
    for (std::size_t i = 0; i < n; ++i) w[i] *= d.weights[i];
    m.trees[t] = grow_cart(d.X, sorted, d.classes, w, d.n_classes, p.tree, per_split, rng);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(p.n_trees)));
  std::vector<std::jthread> pool;
  for (unsigned wk = 0; wk < workers; ++wk) {
    pool.emplace_back([&, wk] {
      for (std::size_t t = wk; t < m.trees.size(); t += workers) grow(t);
    });
  }
  pool.clear();
  return m;
}

std::vector<double> ForestModel::predict_proba(std::span<const double> x) const {
  std::vector<double> votes(static_cast<std::size_t>(n_classes), 0.0);
  for (const auto& t : trees) {
    const auto& dist = t.leaf_value(x);
    const auto best = std::max_element(dist.begin(), dist.end()) - dist.begin();
    votes[static_cast<std::size_t>(best)] += 1.0;
  }
  for (double& v : votes) v /= static_cast<double>(trees.size());
  return votes;
}

}  // namespace burstcast
