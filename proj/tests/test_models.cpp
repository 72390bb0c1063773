#include <doctest.h>

#include <cmath>
#include <numeric>

#include "burstcast/error.hpp"
#include "burstcast/models/grid_search.hpp"
#include "burstcast/models/metrics.hpp"
#include "burstcast/models/model.hpp"
#include "burstcast/rng.hpp"
#include "support.hpp"

using namespace burstcast;
using testsupport::kind_of;

namespace {

Dataset make_dataset(const Matrix& X, std::vector<int> y) {
  Dataset d;
  for (std::size_t j = 0; j < X.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.X = X;
  d.y_now = y;
  d.y = std::move(y);
  for (std::size_t i = 0; i < d.rows(); ++i) d.timestamps.push_back(static_cast<std::int64_t>(i) * 300);
  return d;
}

// Two noisy blobs per class in 3 features; labels in [0, classes).
Dataset blobs(std::uint64_t seed, std::size_t n, int classes = 2) {
  Rng r(seed);
  Matrix X(n, 3);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(r.below(static_cast<std::uint64_t>(classes)));
    y[i] = c;
    X(i, 0) = 2.0 * c + r.normal();
    X(i, 1) = -1.5 * c + r.normal();
    X(i, 2) = r.normal();
  }
  return make_dataset(X, y);
}

Hyperparams small(Family f) {
  Hyperparams hp = Hyperparams::defaults(f);
  if (auto* p = std::get_if<ForestParams>(&hp.params)) p->n_trees = 15;
  if (auto* p = std::get_if<BoostParams>(&hp.params)) p->n_estimators = 20;
  if (auto* p = std::get_if<LogisticParams>(&hp.params)) p->max_iterations = 500;
  return hp;
}

const Family kFamilies[] = {Family::NaiveBayes, Family::Logistic, Family::Tree, Family::Forest, Family::Boosting};

double gini(const std::vector<double>& counts) {
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (n == 0) return 0;
  double g = 1;
  for (double c : counts) g -= (c / n) * (c / n);
  return g;
}

}  // namespace

TEST_CASE("every family is deterministic and round-trips exactly") {
  const Dataset d = blobs(41, 400, 3);
  const Dataset probe = blobs(42, 200, 3);
  for (Family f : kFamilies) {
    CAPTURE(family_name(f));
    const TrainedModel a = train(d, small(f), 7);
    const TrainedModel b = train(d, small(f), 7);
    CHECK(a == b);
    CHECK(model_to_json(a) == model_to_json(b));
    const TrainedModel back = model_from_json(model_to_json(a));
    CHECK(back == a);
    CHECK(predict_proba(back, probe.X) == predict_proba(a, probe.X));
    CHECK(predict(back, probe.X) == predict(a, probe.X));
    CHECK(a.classes == std::vector<int>{0, 1, 2});
    CHECK(a.meta.seed == 7);
    CHECK(a.meta.train_rows == 400);
  }
}

TEST_CASE("save and load") {
  const auto dir = testsupport::scratch("models_io");
  const TrainedModel m = train(blobs(43, 200), small(Family::Boosting), 1);
  save_model(m, dir / "m.json");
  CHECK(load_model(dir / "m.json") == m);
  CHECK(kind_of([&] { load_model(dir / "absent.json"); }) == ErrorKind::MissingArtifact);
}

TEST_CASE("probabilities are nonnegative and sum to one") {
  const Dataset d = blobs(44, 300, 3);
  const Dataset probe = blobs(45, 100, 3);
  for (Family f : kFamilies) {
    CAPTURE(family_name(f));
    const TrainedModel m = train(d, small(f), 3);
    const auto proba = predict_proba(m, probe.X);
    const auto labels = predict(m, probe.X);
    for (std::size_t i = 0; i < proba.size(); ++i) {
      REQUIRE(proba[i].size() == 3);
      double sum = 0;
      std::size_t arg = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(proba[i][c] >= 0.0);
        sum += proba[i][c];
        if (proba[i][c] > proba[i][arg]) arg = c;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-9);
      CHECK(labels[i] == m.classes[arg]);
    }
    CHECK(evaluate(m, d).f1 > 0.6);
  }
}

TEST_CASE("predict rejects the wrong arity") {
  const TrainedModel m = train(blobs(46, 100), small(Family::Tree), 1);
  CHECK(kind_of([&] { predict(m, Matrix(3, 2)); }) == ErrorKind::ArityMismatch);
}

TEST_CASE("separable toy set: shallow tree fits perfectly") {
  Matrix X(8, 2);
  const double pts[8][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {5, 5}, {6, 5}, {5, 6}, {6, 6}};
  for (int i = 0; i < 8; ++i) X(i, 0) = pts[i][0], X(i, 1) = pts[i][1];
  const Dataset d = make_dataset(X, {0, 0, 0, 0, 1, 1, 1, 1});
  const TrainedModel m = train(d, Hyperparams::defaults(Family::Tree), 1);
  const auto& tree = std::get<TreeModel>(m.learned).tree;
  CHECK(tree.depth() <= 2);
  CHECK(predict(m, X) == d.y);
  // Midpoint threshold on the lowest informative feature.
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == 3.0);
}

TEST_CASE("tree prediction follows an explicit path trace") {
  const Dataset d = blobs(47, 500, 3);
  Hyperparams hp = Hyperparams::defaults(Family::Tree);
  std::get<TreeParams>(hp.params).max_depth = 5;
  const TrainedModel m = train(d, hp, 2);
  const auto& nodes = std::get<TreeModel>(m.learned).tree.nodes;
  const auto proba = predict_proba(m, d.X);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    std::size_t at = 0;
    while (nodes[at].feature >= 0)
      at = static_cast<std::size_t>(d.X(i, static_cast<std::size_t>(nodes[at].feature)) <= nodes[at].threshold
                                        ? nodes[at].left
                                        : nodes[at].right);
    CHECK(proba[i] == nodes[at].value);
  }
}

TEST_CASE("tree limits and Gini decrease") {
  const Dataset d = blobs(48, 600, 3);
  Hyperparams hp = Hyperparams::defaults(Family::Tree);
  auto& tp = std::get<TreeParams>(hp.params);
  tp.max_leaf_nodes = 9;
  const TrainedModel m = train(d, hp, 1);
  const auto& tree = std::get<TreeModel>(m.learned).tree;
  CHECK(tree.leaf_count() <= 9);
  tp.max_leaf_nodes.reset();
  tp.max_depth = 3;
  CHECK(std::get<TreeModel>(train(d, hp, 1).learned).tree.depth() <= 3);

  // Route the training rows and compare impurities at every split.
  const auto& nodes = tree.nodes;
  std::vector<std::vector<double>> counts(nodes.size(), std::vector<double>(3, 0.0));
  for (std::size_t i = 0; i < d.rows(); ++i) {
    std::size_t at = 0;
    for (;;) {
      counts[at][static_cast<std::size_t>(d.y[i])] += 1;
      if (nodes[at].feature < 0) break;
      at = static_cast<std::size_t>(d.X(i, static_cast<std::size_t>(nodes[at].feature)) <= nodes[at].threshold
                                        ? nodes[at].left
                                        : nodes[at].right);
    }
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature < 0) continue;
    const auto& l = counts[static_cast<std::size_t>(nodes[k].left)];
    const auto& r = counts[static_cast<std::size_t>(nodes[k].right)];
    const double nl = std::accumulate(l.begin(), l.end(), 0.0), nr = std::accumulate(r.begin(), r.end(), 0.0);
    CHECK(nl > 0);
    CHECK(nr > 0);
    CHECK((nl * gini(l) + nr * gini(r)) / (nl + nr) <= gini(counts[k]) + 1e-12);
  }
}

TEST_CASE("boosting loss never increases") {
  for (std::uint64_t seed : {49u, 50u}) {
    for (int classes : {2, 4}) {
      Hyperparams hp = Hyperparams::defaults(Family::Boosting);
      auto& bp = std::get<BoostParams>(hp.params);
      bp.n_estimators = 40;
      bp.learning_rate = 1.0;
      bp.colsample_ratio = 0.67;
      const TrainedModel m = train(blobs(seed, 500, classes), hp, seed);
      const auto& bm = std::get<BoostModel>(m.learned);
      CHECK(bm.boosters.size() == (classes == 2 ? 1u : static_cast<std::size_t>(classes)));
      for (const auto& b : bm.boosters) {
        for (std::size_t k = 1; k < b.train_loss.size(); ++k) CHECK(b.train_loss[k] <= b.train_loss[k - 1]);
      }
    }
  }
}

TEST_CASE("gamma only shrinks boosted trees") {
  const Dataset d = blobs(51, 400);
  Hyperparams hp = Hyperparams::defaults(Family::Boosting);
  auto& bp = std::get<BoostParams>(hp.params);
  bp.n_estimators = 1;
  std::size_t prev = SIZE_MAX;
  for (double gamma : {0.0, 0.5, 5.0, 50.0, 5000.0}) {
    bp.gamma = gamma;
    const TrainedModel m = train(d, hp, 1);
    const std::size_t leaves = std::get<BoostModel>(m.learned).boosters[0].trees[0].leaf_count();
    CHECK(leaves <= prev);
    prev = leaves;
  }
}

TEST_CASE("forest and seeds") {
  const Dataset d = blobs(52, 300);
  const Dataset probe = blobs(53, 100);
  Hyperparams hp = small(Family::Forest);
  const TrainedModel a = train(d, hp, 5), b = train(d, hp, 5), c = train(d, hp, 6);
  CHECK(predict(a, probe.X) == predict(b, probe.X));
  CHECK(std::get<ForestModel>(a.learned).trees.size() == 15);
  CHECK(std::get<ForestModel>(a.learned) != std::get<ForestModel>(c.learned));
}

TEST_CASE("naive Bayes picks the class whose mean it sits on") {
  Matrix X(6, 1);
  const double v[6] = {0, 0.1, -0.1, 100, 100.1, 99.9};
  for (int i = 0; i < 6; ++i) X(i, 0) = v[i];
  const TrainedModel m = train(make_dataset(X, {0, 0, 0, 1, 1, 1}), Hyperparams::defaults(Family::NaiveBayes), 1);
  Matrix q(2, 1);
  q(0, 0) = 0.0;
  q(1, 0) = 100.0;
  CHECK(predict(m, q) == std::vector<int>{0, 1});
}

TEST_CASE("logistic regression separates 1-D data with a weak penalty") {
  Matrix X(40, 1);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = i < 20 ? i * 0.1 : 3.0 + i * 0.1;
    y[static_cast<std::size_t>(i)] = i >= 20;
  }
  Hyperparams hp = Hyperparams::defaults(Family::Logistic);
  std::get<LogisticParams>(hp.params).inverse_penalty = 1e4;
  const TrainedModel m = train(make_dataset(X, y), hp, 1);
  CHECK(predict(m, X) == y);
}

TEST_CASE("training errors") {
  Matrix X(4, 1);
  const Dataset one = make_dataset(X, {1, 1, 1, 1});
  CHECK(kind_of([&] { train(one, Hyperparams::defaults(Family::Tree), 1); }) == ErrorKind::SingleClassTrainSet);
  CHECK(kind_of([&] { train(one, Hyperparams::defaults(Family::Boosting), 1); }) == ErrorKind::SingleClassTrainSet);
  CHECK_NOTHROW(train(one, Hyperparams::defaults(Family::NaiveBayes), 1));
  Matrix bad(4, 1);
  bad(2, 0) = std::nan("");
  CHECK(kind_of([&] { train(make_dataset(bad, {0, 1, 0, 1}), Hyperparams::defaults(Family::Tree), 1); }) ==
        ErrorKind::NonFiniteFeature);
  CHECK(kind_of([&] { train(make_dataset(Matrix(0, 1), {}), Hyperparams::defaults(Family::Tree), 1); }) ==
        ErrorKind::TooFewRows);
  Hyperparams hp = Hyperparams::defaults(Family::Boosting);
  std::get<BoostParams>(hp.params).learning_rate = 0.0;
  CHECK(kind_of([&] { validate(hp); }) == ErrorKind::InvalidHyperparams);
  CHECK(kind_of([] { model_from_json("{\"schema_version\": 99}"); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { model_from_json("not json"); }) == ErrorKind::ParseError);
}

TEST_CASE("hyperparams JSON round trip") {
  for (Family f : kFamilies) {
    Hyperparams hp = small(f);
    hp.class_weighted = f == Family::Tree;
    if (auto* p = std::get_if<TreeParams>(&hp.params)) p->max_depth = 4;
    CHECK(hyperparams_from_json(hyperparams_to_json(hp)) == hp);
  }
}

TEST_CASE("metrics arithmetic") {
  // TP=3, FP=1, FN=1, TN=5.
  const std::vector<int> truth{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> pred{1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
  const Metrics m = evaluate_binary(truth, pred);
  CHECK(m.tp == 3);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.precision == 0.75);
  CHECK(m.recall == 0.75);
  CHECK(m.f1 == 0.75);
  CHECK_FALSE(m.zero_division);
  CHECK(m.confusion == std::vector<std::vector<std::size_t>>{{5, 1}, {1, 3}});

  CHECK(evaluate_binary(truth, truth).f1 == 1.0);

  std::vector<int> rare(100, 0);
  rare[50] = 1;
  const Metrics none = evaluate_binary(rare, std::vector<int>(100, 0));
  CHECK(none.f1 == 0.0);
  CHECK(none.zero_division);

  // Macro over {0,1}: mean of the two per-class F1s.
  const Metrics mac = evaluate_macro(truth, pred);
  CHECK(mac.macro);
  REQUIRE(mac.per_class.size() == 2);
  CHECK(mac.per_class[1].f1 == doctest::Approx(m.f1));
  CHECK(mac.f1 == doctest::Approx((mac.per_class[0].f1 + mac.per_class[1].f1) / 2));
  CHECK(f1_from(0, 0) == 0.0);
  CHECK(f1_from(0.5, 1.0) == doctest::Approx(2.0 / 3.0));

  const Metrics multi = evaluate_labels(std::vector<int>{0, 1, 2, 3}, std::vector<int>{0, 1, 2, 0});
  CHECK(multi.macro);
  CHECK(multi.classes == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("persistence baseline") {
  Matrix X(20, 1);
  std::vector<int> truth(20, 0), now(20, 0);
  for (int i = 1; i < 20; i += 4) truth[static_cast<std::size_t>(i)] = 1;  // single-bin bursts
  for (int i = 0; i + 1 < 20; ++i) now[static_cast<std::size_t>(i + 1)] = truth[static_cast<std::size_t>(i)];
  Dataset d = make_dataset(X, truth);
  d.y_now = now;
  CHECK(persistence_baseline(d).recall == 0.0);
  Dataset all = make_dataset(X, std::vector<int>(20, 1));
  CHECK(persistence_baseline(all).f1 == 1.0);
}

TEST_CASE("grid search") {
  const Dataset d = blobs(54, 400);
  CHECK(kind_of([&] { grid_search(d, {}, 1); }) == ErrorKind::EmptyGrid);
  const GridResult single = grid_search(d, {small(Family::Tree)}, 1);
  CHECK(single.best == small(Family::Tree));
  CHECK(single.leaderboard.size() == 1);

  std::vector<Hyperparams> grid;
  for (int depth : {1, 2, 4, 8}) {
    Hyperparams hp = Hyperparams::defaults(Family::Tree);
    std::get<TreeParams>(hp.params).max_depth = depth;
    grid.push_back(hp);
  }
  grid.push_back(grid[1]);  // duplicate cell: the first occurrence must win ties
  const GridResult r = grid_search(d, grid, 1);
  CHECK(r.leaderboard.size() == grid.size());
  for (const auto& row : r.leaderboard) CHECK(r.leaderboard[r.best_index].validation_f1 >= row.validation_f1);
  for (std::size_t i = 0; i < r.best_index; ++i) CHECK(r.leaderboard[i].validation_f1 < r.leaderboard[r.best_index].validation_f1);
  CHECK(r.best == grid[r.best_index]);
  CHECK(r.leaderboard[4].validation_f1 == r.leaderboard[1].validation_f1);
  CHECK(r.best_index != 4);
  const std::string csv = leaderboard_csv(r, {"h", 1, true});
  CHECK(csv.find("index,family,validation_f1,best,params\n") != std::string::npos);
}
