#include "burstcast/models/grid_search.hpp"

#include <algorithm>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "burstcast/error.hpp"

namespace burstcast {

Metrics evaluate_labels(std::span<const int> truth, std::span<const int> pred) {
  const bool binary = std::all_of(truth.begin(), truth.end(), [](int v) { return v == 0 || v == 1; }) &&
                      std::all_of(pred.begin(), pred.end(), [](int v) { return v == 0 || v == 1; });
  return binary ? evaluate_binary(truth, pred, 1) : evaluate_macro(truth, pred);
}

Metrics evaluate(const TrainedModel& m, const Dataset& test) {
  if (test.rows() == 0) fail(ErrorKind::TooFewRows, "empty test set");
  const auto pred = predict(m, test.X);
  return evaluate_labels(test.y, pred);
}

Metrics persistence_baseline(const Dataset& test) {
  if (test.rows() == 0) fail(ErrorKind::TooFewRows, "empty test set");
  return evaluate_labels(test.y, test.y_now);
}

GridResult grid_search(const Dataset& train, const std::vector<Hyperparams>& grid, std::uint64_t seed) {
  if (grid.empty()) fail(ErrorKind::EmptyGrid, "hyperparameter grid is empty");
  const Split inner = chrono_split(train, 0.8);
  GridResult r;
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const TrainedModel m = burstcast::train(inner.train, grid[i], seed);
    const double f1 = evaluate(m, inner.test).f1;
    r.leaderboard.push_back({i, grid[i], f1});
    if (f1 > best) {
      best = f1;
      r.best_index = i;
    }
  }
  r.best = grid[r.best_index];
  return r;
}

namespace {

// "k=v;k=v" so the cell needs no CSV quoting.
std::string flatten_params(const Hyperparams& hp) {
  const auto j = nlohmann::ordered_json::parse(hyperparams_to_json(hp));
  std::string out = "class_weighted=" + std::string(hp.class_weighted ? "1" : "0");
  std::function<void(const std::string&, const nlohmann::ordered_json&)> walk = [&](const std::string& prefix,
                                                                                    const nlohmann::ordered_json& v) {
    for (const auto& [k, x] : v.items()) {
      if (x.is_object()) {
        walk(prefix + k + ".", x);
      } else {
        out += ";" + prefix + k + "=" + (x.is_null() ? std::string("none") : x.dump());
      }
    }
  };
  walk("", j.at("params"));
  return out;
}

}  // namespace

std::string leaderboard_csv(const GridResult& r, const Provenance& prov) {
  std::ostringstream out;
  write_provenance(out, prov);
  out << "index,family,validation_f1,best,params\n";
  for (const auto& row : r.leaderboard) {
    const std::string quoted = flatten_params(row.hyperparams);
    out << row.index << ',' << family_name(row.hyperparams.family()) << ',' << format_double(row.validation_f1)
        << ',' << (row.index == r.best_index ? 1 : 0) << ',' << quoted << '\n';
  }
  return out.str();
}

}  // namespace burstcast
