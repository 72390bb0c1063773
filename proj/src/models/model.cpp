#include "burstcast/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "burstcast/csv.hpp"
#include "burstcast/error.hpp"

namespace burstcast {

using json = nlohmann::ordered_json;

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::NaiveBayes: return "gnb";
    case Family::Logistic: return "logreg";
    case Family::Tree: return "tree";
    case Family::Forest: return "forest";
    case Family::Boosting: return "gbt";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::NaiveBayes, Family::Logistic, Family::Tree, Family::Forest, Family::Boosting})
    if (family_name(f) == name) return f;
  fail(ErrorKind::InvalidConfig, "unknown model family '" + std::string(name) + "'");
}

Hyperparams Hyperparams::defaults(Family f) {
  Hyperparams hp;
  switch (f) {
    case Family::NaiveBayes: hp.params = NaiveBayesParams{}; break;
    case Family::Logistic: hp.params = LogisticParams{}; break;
    case Family::Tree: hp.params = TreeParams{}; break;
    case Family::Forest: hp.params = ForestParams{}; break;
    case Family::Boosting: hp.params = BoostParams{}; break;
  }
  return hp;
}

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidHyperparams, what);
}

void validate_tree(const TreeParams& t) {
  check(!t.max_depth || *t.max_depth >= 1, "max_depth must be >= 1");
  check(!t.max_leaf_nodes || *t.max_leaf_nodes >= 2, "max_leaf_nodes must be >= 2");
  check(t.min_samples_split >= 2, "min_samples_split must be >= 2");
  check(!t.max_features || *t.max_features >= 1, "max_features must be >= 1");
}

}  // namespace

void validate(const Hyperparams& hp) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          check(p.variance_smoothing >= 0.0, "variance_smoothing must be >= 0");
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          check(p.inverse_penalty > 0.0, "inverse_penalty must be > 0");
          check(p.max_iterations >= 1, "max_iterations must be >= 1");
          check(p.tolerance > 0.0, "tolerance must be > 0");
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          validate_tree(p);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          check(p.n_trees >= 1, "n_trees must be >= 1");
          validate_tree(p.tree);
        } else {
          check(p.n_estimators >= 1, "n_estimators must be >= 1");
          check(p.learning_rate > 0.0, "learning_rate must be > 0");
          check(p.max_depth >= 1, "max_depth must be >= 1");
          check(p.min_child_weight >= 0.0, "min_child_weight must be >= 0");
          check(p.gamma >= 0.0 && p.lambda >= 0.0 && p.alpha >= 0.0, "regularization must be >= 0");
          check(p.colsample_ratio > 0.0 && p.colsample_ratio <= 1.0, "colsample_ratio must be in (0, 1]");
        }
      },
      hp.params);
}

// ---- training -----------------------------------------------------------

TrainedModel train(const Dataset& d, const Hyperparams& hp, std::uint64_t seed) {
  validate(hp);
  if (d.rows() == 0) fail(ErrorKind::TooFewRows, "empty training set");
  for (double v : d.X.data())
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteFeature, "training features contain NaN or infinity");

  TrainedModel m;
  m.hyperparams = hp;
  m.feature_names = d.feature_names;
  std::set<int> seen(d.y.begin(), d.y.end());
  m.classes.assign(seen.begin(), seen.end());
  if (m.classes.size() < 2 && hp.family() != Family::NaiveBayes)
    fail(ErrorKind::SingleClassTrainSet, "training labels contain a single class");

  std::vector<int> dense(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i)
    dense[i] = static_cast<int>(std::lower_bound(m.classes.begin(), m.classes.end(), d.y[i]) - m.classes.begin());
  const int K = static_cast<int>(m.classes.size());
  std::vector<double> weights(d.rows(), 1.0);
  if (hp.class_weighted) {
    std::vector<double> count(static_cast<std::size_t>(K), 0.0);
    for (int c : dense) count[static_cast<std::size_t>(c)] += 1.0;
    for (std::size_t i = 0; i < d.rows(); ++i)
      weights[i] = static_cast<double>(d.rows()) / (K * count[static_cast<std::size_t>(dense[i])]);
  }
  const TrainingData td{d.X, dense, weights, K};

  m.meta.seed = seed;
  m.meta.horizon_bins = d.horizon_bins;
  m.meta.train_rows = d.rows();

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          m.learned = NaiveBayesModel::fit(td, p);
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          m.learned = LogisticModel::fit(td, p);
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          m.learned = TreeModel::fit(td, p, seed);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          m.learned = ForestModel::fit(td, p, seed);
        } else {
          m.learned = BoostModel::fit(td, p, seed);
        }
      },
      hp.params);
  return m;
}

std::vector<std::vector<double>> predict_proba(const TrainedModel& m, const Matrix& rows) {
  if (rows.rows() > 0 && rows.cols() != m.feature_names.size())
    fail(ErrorKind::ArityMismatch, "model expects " + std::to_string(m.feature_names.size()) + " features, got " +
                                       std::to_string(rows.cols()));
  std::vector<std::vector<double>> out(rows.rows());
  std::visit(
      [&](const auto& est) {
        for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = est.predict_proba(rows.row(i));
      },
      m.learned);
  return out;
}

std::vector<int> predict(const TrainedModel& m, const Matrix& rows) {
  const auto proba = predict_proba(m, rows);
  std::vector<int> out(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) {
    const auto& p = proba[i];
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[best]) best = k;
    out[i] = m.classes[best];
  }
  return out;
}

// ---- serialization ------------------------------------------------------

namespace {

json opt_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::optional<int> get_opt_int(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<int>();
}

json tree_params_json(const TreeParams& t) {
  return json{{"max_depth", opt_int(t.max_depth)},
              {"max_leaf_nodes", opt_int(t.max_leaf_nodes)},
              {"min_samples_split", t.min_samples_split},
              {"max_features", opt_int(t.max_features)}};
}

TreeParams tree_params_from(const json& j) {
  TreeParams t;
  t.max_depth = get_opt_int(j, "max_depth");
  t.max_leaf_nodes = get_opt_int(j, "max_leaf_nodes");
  t.min_samples_split = j.value("min_samples_split", 2);
  t.max_features = get_opt_int(j, "max_features");
  return t;
}

}  // namespace

namespace {

json hyperparams_json(const Hyperparams& hp) {
  json params = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          return json{{"variance_smoothing", p.variance_smoothing}};
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          return json{{"inverse_penalty", p.inverse_penalty},
                      {"max_iterations", p.max_iterations},
                      {"tolerance", p.tolerance}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          return tree_params_json(p);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return json{{"n_trees", p.n_trees}, {"tree", tree_params_json(p.tree)}};
        } else {
          return json{{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate},
                      {"max_depth", p.max_depth},       {"min_child_weight", p.min_child_weight},
                      {"gamma", p.gamma},               {"lambda", p.lambda},
                      {"alpha", p.alpha},               {"colsample_ratio", p.colsample_ratio}};
        }
      },
      hp.params);
  return json{{"family", std::string(family_name(hp.family()))},
              {"class_weighted", hp.class_weighted},
              {"params", params}};
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams hp = Hyperparams::defaults(parse_family(j.at("family").get<std::string>()));
  hp.class_weighted = j.value("class_weighted", false);
  const json& p = j.at("params");
  switch (hp.family()) {
    case Family::NaiveBayes: {
      NaiveBayesParams q;
      q.variance_smoothing = p.value("variance_smoothing", q.variance_smoothing);
      hp.params = q;
      break;
    }
    case Family::Logistic: {
      LogisticParams q;
      q.inverse_penalty = p.value("inverse_penalty", q.inverse_penalty);
      q.max_iterations = p.value("max_iterations", q.max_iterations);
      q.tolerance = p.value("tolerance", q.tolerance);
      hp.params = q;
      break;
    }
    case Family::Tree: hp.params = tree_params_from(p); break;
    case Family::Forest: {
      ForestParams q;
      q.n_trees = p.value("n_trees", q.n_trees);
      if (p.contains("tree")) q.tree = tree_params_from(p.at("tree"));
      hp.params = q;
      break;
    }
    case Family::Boosting: {
      BoostParams q;
      q.n_estimators = p.value("n_estimators", q.n_estimators);
      q.learning_rate = p.value("learning_rate", q.learning_rate);
      q.max_depth = p.value("max_depth", q.max_depth);
      q.min_child_weight = p.value("min_child_weight", q.min_child_weight);
      q.gamma = p.value("gamma", q.gamma);
      q.lambda = p.value("lambda", q.lambda);
      q.alpha = p.value("alpha", q.alpha);
      q.colsample_ratio = p.value("colsample_ratio", q.colsample_ratio);
      hp.params = q;
      break;
    }
  }
  return hp;
}

json tree_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       value = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return json{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

DecisionTree tree_from(const json& j) {
  DecisionTree t;
  const auto& f = j.at("feature");
  t.nodes.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    TreeNode& n = t.nodes[i];
    n.feature = f[i].get<int>();
    n.threshold = j.at("threshold")[i].get<double>();
    n.left = j.at("left")[i].get<int>();
    n.right = j.at("right")[i].get<int>();
    n.value = j.at("value")[i].get<std::vector<double>>();
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= f.size() ||
                         static_cast<std::size_t>(n.right) >= f.size()))
      fail(ErrorKind::ParseError, "tree node has out-of-range children");
  }
  if (t.nodes.empty()) fail(ErrorKind::ParseError, "empty tree");
  return t;
}

json learned_json(const TrainedModel& m) {
  return std::visit(
      [](const auto& est) -> json {
        using T = std::decay_t<decltype(est)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          return json{{"log_prior", est.log_prior}, {"mean", est.mean}, {"var", est.var}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return json{{"feature_mean", est.feature_mean}, {"feature_scale", est.feature_scale},
                      {"coef", est.coef},                 {"intercept", est.intercept},
                      {"iterations", est.iterations},     {"converged", est.converged}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return json{{"tree", tree_json(est.tree)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : est.trees) trees.push_back(tree_json(t));
          return json{{"n_classes", est.n_classes}, {"trees", trees}};
        } else {
          json boosters = json::array();
          for (const auto& b : est.boosters) {
            json trees = json::array();
            for (const auto& t : b.trees) trees.push_back(tree_json(t));
            boosters.push_back(json{{"base_margin", b.base_margin}, {"train_loss", b.train_loss}, {"trees", trees}});
          }
          return json{{"n_classes", est.n_classes}, {"boosters", boosters}};
        }
      },
      m.learned);
}

void learned_from(TrainedModel& m, const json& j) {
  switch (m.family()) {
    case Family::NaiveBayes: {
      NaiveBayesModel e;
      e.log_prior = j.at("log_prior").get<std::vector<double>>();
      e.mean = j.at("mean").get<std::vector<std::vector<double>>>();
      e.var = j.at("var").get<std::vector<std::vector<double>>>();
      m.learned = std::move(e);
      break;
    }
    case Family::Logistic: {
      LogisticModel e;
      e.feature_mean = j.at("feature_mean").get<std::vector<double>>();
      e.feature_scale = j.at("feature_scale").get<std::vector<double>>();
      e.coef = j.at("coef").get<std::vector<std::vector<double>>>();
      e.intercept = j.at("intercept").get<std::vector<double>>();
      e.iterations = j.value("iterations", 0);
      e.converged = j.value("converged", false);
      m.learned = std::move(e);
      break;
    }
    case Family::Tree: m.learned = TreeModel{tree_from(j.at("tree"))}; break;
    case Family::Forest: {
      ForestModel e;
      e.n_classes = j.at("n_classes").get<int>();
      for (const auto& t : j.at("trees")) e.trees.push_back(tree_from(t));
      m.learned = std::move(e);
      break;
    }
    case Family::Boosting: {
      BoostModel e;
      e.n_classes = j.at("n_classes").get<int>();
      for (const auto& bj : j.at("boosters")) {
        Booster b;
        b.base_margin = bj.at("base_margin").get<double>();
        b.train_loss = bj.value("train_loss", std::vector<double>{});
        for (const auto& t : bj.at("trees")) b.trees.push_back(tree_from(t));
        e.boosters.push_back(std::move(b));
      }
      m.learned = std::move(e);
      break;
    }
  }
}

}  // namespace

std::string hyperparams_to_json(const Hyperparams& hp) { return hyperparams_json(hp).dump(); }

Hyperparams hyperparams_from_json(const std::string& text) {
  try {
    Hyperparams hp = hyperparams_from_json(json::parse(text));
    validate(hp);
    return hp;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidHyperparams, std::string("hyperparams JSON: ") + e.what());
  }
}

std::string model_to_json(const TrainedModel& m) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["family"] = std::string(family_name(m.family()));
  j["hyperparams"] = hyperparams_json(m.hyperparams);
  j["classes"] = m.classes;
  j["feature_names"] = m.feature_names;
  j["meta"] = json{{"seed", m.meta.seed},
                   {"horizon_bins", m.meta.horizon_bins},
                   {"channel", m.meta.channel},
                   {"feature_set", m.meta.feature_set},
                   {"config_hash", m.meta.config_hash},
                   {"train_rows", m.meta.train_rows}};
  j["learned"] = learned_json(m);
  return j.dump() + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kModelSchemaVersion)
    fail(ErrorKind::SchemaMismatch, "model schema_version is not " + std::to_string(kModelSchemaVersion));
  try {
    TrainedModel m;
    m.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    m.classes = j.at("classes").get<std::vector<int>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const json& meta = j.at("meta");
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.horizon_bins = meta.at("horizon_bins").get<std::int64_t>();
    m.meta.channel = meta.value("channel", std::string{});
    m.meta.feature_set = meta.value("feature_set", 0);
    m.meta.config_hash = meta.value("config_hash", std::string{});
    m.meta.train_rows = meta.value("train_rows", std::size_t{0});
    learned_from(m, j.at("learned"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(m));
}

TrainedModel load_model(const std::filesystem::path& path) { return model_from_json(read_text_file(path)); }

}  // namespace burstcast
