#include <algorithm>
#include <cmath>
#include <numeric>

#include "burstcast/models/estimators.hpp"

namespace burstcast {
namespace {

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double mean_log_loss(std::span<const double> margin, std::span<const double> y, std::span<const double> w,
                     double mass) {
  double acc = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i)
    acc += w[i] * (y[i] > 0.5 ? softplus(-margin[i]) : softplus(margin[i]));
  return acc / mass;
}

void scale_leaves(DecisionTree& t, double factor) {
  for (auto& n : t.nodes)
    for (double& v : n.value) v *= factor;
}

Booster fit_booster(const Matrix& X, const SortedColumns& sorted, std::span<const double> y,
                    std::span<const double> w, const BoostParams& p, Rng& rng) {
  const std::size_t n = X.rows();
  const std::size_t F = X.cols();
  const double mass = std::accumulate(w.begin(), w.end(), 0.0);
  double pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) pos += w[i] * y[i];
  const double prior = std::clamp(pos / mass, 1e-6, 1.0 - 1e-6);

  Booster b;
  b.base_margin = std::log(prior / (1.0 - prior));
  std::vector<double> margin(n, b.base_margin), trial(n), grad(n), hess(n);
  double loss = mean_log_loss(margin, y, w, mass);
  b.train_loss.push_back(loss);

  const auto n_cols = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(p.colsample_ratio * static_cast<double>(F))), 1, F);
  std::vector<std::size_t> all(F);
  std::iota(all.begin(), all.end(), std::size_t{0});

  for (int stage = 0; stage < p.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pr = sigmoid(margin[i]);
      grad[i] = w[i] * (pr - y[i]);
      hess[i] = w[i] * std::max(pr * (1.0 - pr), 1e-16);
    }
    std::vector<std::size_t> cols = all;
    if (n_cols < F) {
      for (std::size_t i = 0; i < n_cols; ++i)
        std::swap(cols[i], cols[i + static_cast<std::size_t>(rng.below(F - i))]);
      cols.resize(n_cols);
      std::sort(cols.begin(), cols.end());
    }
    DecisionTree tree = grow_boost_tree(X, sorted, grad, hess, p, cols);
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = tree.leaf_value(X.row(i))[0];

    // Shrunken Newton step; halved until the training loss does not rise.
    double step = p.learning_rate;
    double next_loss = loss;
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = margin[i] + step * raw[i];
      next_loss = mean_log_loss(trial, y, w, mass);
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      b.train_loss.push_back(loss);
      break;
    }
    scale_leaves(tree, step);
    margin.swap(trial);
    loss = next_loss;
    b.train_loss.push_back(loss);
    b.trees.push_back(std::move(tree));
  }
  return b;
}

}  // namespace

double Booster::margin(std::span<const double> x) const {
  double m = base_margin;
  for (const auto& t : trees) m += t.leaf_value(x)[0];
  return m;
}

BoostModel BoostModel::fit(const TrainingData& d, const BoostParams& p, std::uint64_t seed) {
  const SortedColumns sorted(d.X);
  BoostModel m;
  m.n_classes = d.n_classes;
  const std::size_t n = d.X.rows();
  const int first = d.n_classes == 2 ? 1 : 0;
  for (int c = first; c < d.n_classes; ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = d.classes[i] == c ? 1.0 : 0.0;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    m.boosters.push_back(fit_booster(d.X, sorted, y, d.weights, p, rng));
  }
  return m;
}

std::vector<double> BoostModel::predict_proba(std::span<const double> x) const {
  const auto K = static_cast<std::size_t>(n_classes);
  std::vector<double> out(K, 0.0);
  if (K == 2) {
    const double p = sigmoid(boosters[0].margin(x));
    out[0] = 1.0 - p;
    out[1] = p;
    return out;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = sigmoid(boosters[k].margin(x));
    total += out[k];
  }
  if (total > 0.0) {
    for (double& v : out) v /= total;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(K));
  }
  return out;
}

}  // namespace burstcast
