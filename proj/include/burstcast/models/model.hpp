#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "burstcast/features.hpp"
#include "burstcast/models/estimators.hpp"
#include "burstcast/models/hyperparams.hpp"

namespace burstcast {

inline constexpr int kModelSchemaVersion = 1;

struct TrainMeta {
  std::uint64_t seed = 0;
  std::int64_t horizon_bins = 1;
  std::string channel;
  int feature_set = 0;
  std::string config_hash;
  std::size_t train_rows = 0;

  bool operator==(const TrainMeta&) const = default;
};

struct TrainedModel {
  Hyperparams hyperparams;
  std::vector<int> classes;  // sorted class ids seen in training
  std::vector<std::string> feature_names;
  TrainMeta meta;
  std::variant<NaiveBayesModel, LogisticModel, TreeModel, ForestModel, BoostModel> learned;

  Family family() const noexcept { return hyperparams.family(); }
  bool operator==(const TrainedModel&) const = default;
};

// Throws SingleClassTrainSet, NonFiniteFeature, InvalidHyperparams, TooFewRows.
TrainedModel train(const Dataset& d, const Hyperparams& hp, std::uint64_t seed);

// One probability row per input row, columns ordered as model.classes.
std::vector<std::vector<double>> predict_proba(const TrainedModel& m, const Matrix& rows);
// Argmax class id; ties go to the lowest class id. Throws ArityMismatch.
std::vector<int> predict(const TrainedModel& m, const Matrix& rows);

// Compact one-line JSON: {"family":..,"class_weighted":..,"params":{..}}.
std::string hyperparams_to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const std::string& text);

std::string model_to_json(const TrainedModel& m);
// Throws SchemaMismatch on a different schema_version, ParseError otherwise.
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace burstcast
