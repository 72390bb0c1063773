#include "burstcast/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "burstcast/error.hpp"

namespace burstcast {

int DecisionTree::leaf_index(std::span<const double> x) const noexcept {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

std::size_t DecisionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const noexcept {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

SortedColumns::SortedColumns(const Matrix& X) : order_(X.cols()) {
  for (std::size_t f = 0; f < X.cols(); ++f) {
    auto& o = order_[f];
    o.resize(X.rows());
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
  }
}

namespace {

using Lists = std::vector<std::vector<std::uint32_t>>;

struct SplitChoice {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double improvement = 0.0;
};

double midpoint(double a, double b) {
  const double m = a + (b - a) * 0.5;
  return m < b ? m : a;
}

// Stable partition of every per-feature list by the chosen split.
std::pair<Lists, Lists> partition(const Lists& lists, const Matrix& X, const SplitChoice& s,
                                  std::vector<char>& goes_left) {
  const auto f = static_cast<std::size_t>(s.feature);
  for (std::uint32_t i : lists[f]) goes_left[i] = X(i, f) <= s.threshold ? 1 : 0;
  Lists left(lists.size()), right(lists.size());
  for (std::size_t k = 0; k < lists.size(); ++k) {
    for (std::uint32_t i : lists[k]) (goes_left[i] ? left[k] : right[k]).push_back(i);
  }
  return {std::move(left), std::move(right)};
}

Lists initial_lists(const SortedColumns& sorted, std::span<const double> weights) {
  Lists lists(sorted.features());
  for (std::size_t f = 0; f < sorted.features(); ++f) {
    const auto& o = sorted.order(f);
    lists[f].reserve(o.size());
    for (std::uint32_t i : o)
      if (weights[i] > 0.0) lists[f].push_back(i);
  }
  return lists;
}

// ---- CART ---------------------------------------------------------------

struct CartContext {
  const Matrix& X;
  std::span<const int> classes;
  std::span<const double> weights;
  int n_classes;
  const TreeParams& params;
  int features_per_split;
  Rng& rng;
};

double gini_mass(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return total - sq / total;
}

std::vector<double> class_mass(const CartContext& ctx, const std::vector<std::uint32_t>& samples) {
  std::vector<double> c(static_cast<std::size_t>(ctx.n_classes), 0.0);
  for (std::uint32_t i : samples) c[static_cast<std::size_t>(ctx.classes[i])] += ctx.weights[i];
  return c;
}

std::vector<std::size_t> candidate_features(const CartContext& ctx, std::size_t n_features) {
  std::vector<std::size_t> feats(n_features);
  std::iota(feats.begin(), feats.end(), std::size_t{0});
  const auto k = static_cast<std::size_t>(std::max(1, ctx.features_per_split));
  if (k < n_features) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(ctx.rng.below(n_features - i));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(k);
    std::sort(feats.begin(), feats.end());
  }
  return feats;
}

SplitChoice best_cart_split(const CartContext& ctx, const Lists& lists, int depth) {
  SplitChoice best;
  const auto& any = lists[0];
  if (any.size() < 2 || static_cast<int>(any.size()) < ctx.params.min_samples_split) return best;
  if (ctx.params.max_depth && depth >= *ctx.params.max_depth) return best;
  const auto parent_counts = class_mass(ctx, any);
  const double total = std::accumulate(parent_counts.begin(), parent_counts.end(), 0.0);
  const double parent = gini_mass(parent_counts, total);
  const double eps = 1e-12 * total;
  if (parent <= eps) return best;

  double best_imp = parent - eps;
  const auto feats = candidate_features(ctx, lists.size());
  std::vector<double> left(parent_counts.size()), right(parent_counts.size());
  for (std::size_t f : feats) {
    const auto& list = lists[f];
    std::fill(left.begin(), left.end(), 0.0);
    double wl = 0.0;
    for (std::size_t p = 0; p + 1 < list.size(); ++p) {
      const std::uint32_t i = list[p];
      const double w = ctx.weights[i];
      left[static_cast<std::size_t>(ctx.classes[i])] += w;
      wl += w;
      const double a = ctx.X(i, f);
      const double b = ctx.X(list[p + 1], f);
      if (!(a < b)) continue;
      for (std::size_t k = 0; k < left.size(); ++k) right[k] = parent_counts[k] - left[k];
      const double imp = gini_mass(left, wl) + gini_mass(right, total - wl);
      if (imp < best_imp) {
        best_imp = imp;
        best.valid = true;
        best.feature = static_cast<int>(f);
        best.threshold = midpoint(a, b);
        best.improvement = parent - imp;
      }
    }
  }
  return best;
}

std::vector<double> normalized(std::vector<double> c) {
  const double t = std::accumulate(c.begin(), c.end(), 0.0);
  if (t > 0.0)
    for (double& v : c) v /= t;
  return c;
}

}  // namespace

DecisionTree grow_cart(const Matrix& X, const SortedColumns& sorted, std::span<const int> classes,
                       std::span<const double> weights, int n_classes, const TreeParams& params,
                       int features_per_split, Rng& rng) {
  CartContext ctx{X, classes, weights, n_classes, params, features_per_split, rng};
  DecisionTree tree;

  struct Pending {
    int node;
    int depth;
    Lists lists;
    SplitChoice split;
  };
  std::vector<Pending> pending;
  auto cmp = [&](std::size_t a, std::size_t b) {
    const auto& pa = pending[a];
    const auto& pb = pending[b];
    if (pa.split.improvement != pb.split.improvement) return pa.split.improvement < pb.split.improvement;
    return pa.node > pb.node;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> queue(cmp);

  auto make_node = [&](Lists lists, int depth) {
    TreeNode n;
    n.value = normalized(class_mass(ctx, lists[0]));
    tree.nodes.push_back(std::move(n));
    const int id = static_cast<int>(tree.nodes.size() - 1);
    SplitChoice s = best_cart_split(ctx, lists, depth);
    if (s.valid) {
      pending.push_back(Pending{id, depth, std::move(lists), s});
      queue.push(pending.size() - 1);
    }
  };

  make_node(initial_lists(sorted, weights), 0);
  std::vector<char> goes_left(X.rows(), 0);
  std::size_t leaves = 1;
  while (!queue.empty()) {
    if (params.max_leaf_nodes && leaves >= static_cast<std::size_t>(*params.max_leaf_nodes)) break;
    const std::size_t idx = queue.top();
    queue.pop();
    Pending p = std::move(pending[idx]);
    auto [l, r] = partition(p.lists, X, p.split, goes_left);
    p.lists.clear();
    {
      TreeNode& n = tree.nodes[static_cast<std::size_t>(p.node)];
      n.feature = p.split.feature;
      n.threshold = p.split.threshold;
    }
    const int left_id = static_cast<int>(tree.nodes.size());
    make_node(std::move(l), p.depth + 1);
    const int right_id = static_cast<int>(tree.nodes.size());
    make_node(std::move(r), p.depth + 1);
    tree.nodes[static_cast<std::size_t>(p.node)].left = left_id;
    tree.nodes[static_cast<std::size_t>(p.node)].right = right_id;
    ++leaves;
  }
  return tree;
}

// ---- boosting trees -----------------------------------------------------

namespace {

struct BoostContext {
  const Matrix& X;
  std::span<const double> grad;
  std::span<const double> hess;
  const BoostParams& params;
  std::span<const std::size_t> features;
};

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double leaf_score(double g, double h, const BoostParams& p) {
  const double t = soft_threshold(g, p.alpha);
  return t * t / (h + p.lambda);
}

double leaf_weight(double g, double h, const BoostParams& p) { return -soft_threshold(g, p.alpha) / (h + p.lambda); }

SplitChoice best_boost_split(const BoostContext& ctx, const Lists& lists, int depth, double G, double H) {
  SplitChoice best;
  if (depth >= ctx.params.max_depth || lists[0].size() < 2) return best;
  const double parent = leaf_score(G, H, ctx.params);
  double best_gain = 0.0;
  for (std::size_t f : ctx.features) {
    const auto& list = lists[f];
    double gl = 0.0, hl = 0.0;
    for (std::size_t p = 0; p + 1 < list.size(); ++p) {
      const std::uint32_t i = list[p];
      gl += ctx.grad[i];
      hl += ctx.hess[i];
      const double a = ctx.X(i, f);
      const double b = ctx.X(list[p + 1], f);
      if (!(a < b)) continue;
      const double hr = H - hl;
      if (hl < ctx.params.min_child_weight || hr < ctx.params.min_child_weight) continue;
      const double gain =
          0.5 * (leaf_score(gl, hl, ctx.params) + leaf_score(G - gl, hr, ctx.params) - parent) - ctx.params.gamma;
      if (gain > best_gain * (1.0 + 1e-12) + 1e-15) {
        best_gain = gain;
        best.valid = true;
        best.feature = static_cast<int>(f);
        best.threshold = midpoint(a, b);
        best.improvement = gain;
      }
    }
  }
  return best;
}

}  // namespace

DecisionTree grow_boost_tree(const Matrix& X, const SortedColumns& sorted, std::span<const double> grad,
                             std::span<const double> hess, const BoostParams& params,
                             std::span<const std::size_t> features) {
  BoostContext ctx{X, grad, hess, params, features};
  DecisionTree tree;
  std::vector<double> ones(X.rows(), 1.0);

  struct Work {
    int node;
    int depth;
    Lists lists;
  };
  std::vector<Work> stack;
  auto sums = [&](const Lists& lists) {
    double g = 0.0, h = 0.0;
    for (std::uint32_t i : lists[0]) {
      g += grad[i];
      h += hess[i];
    }
    return std::pair{g, h};
  };
  auto make_node = [&](Lists lists, int depth) {
    const auto [g, h] = sums(lists);
    TreeNode n;
    n.value = {leaf_weight(g, h, params)};
    tree.nodes.push_back(std::move(n));
    const int id = static_cast<int>(tree.nodes.size() - 1);
    stack.push_back(Work{id, depth, std::move(lists)});
    return id;
  };

  make_node(initial_lists(sorted, ones), 0);
  std::vector<char> goes_left(X.rows(), 0);
  // FIFO over the work list gives breadth-first node numbering.
  for (std::size_t w = 0; w < stack.size(); ++w) {
    Lists lists = std::move(stack[w].lists);
    const int node = stack[w].node;
    const int depth = stack[w].depth;
    const auto [g, h] = sums(lists);
    const SplitChoice s = best_boost_split(ctx, lists, depth, g, h);
    if (!s.valid) continue;
    auto [l, r] = partition(lists, X, s, goes_left);
    lists.clear();
    const int left_id = make_node(std::move(l), depth + 1);
    const int right_id = make_node(std::move(r), depth + 1);
    TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    n.feature = s.feature;
    n.threshold = s.threshold;
    n.left = left_id;
    n.right = right_id;
  }
  return tree;
}

}  // namespace burstcast
