#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "burstcast/csv.hpp"
#include "burstcast/features.hpp"
#include "burstcast/models/metrics.hpp"
#include "burstcast/models/model.hpp"

namespace burstcast {

// Binary F1 on class 1 when the labels are {0,1}; macro F1 otherwise.
Metrics evaluate(const TrainedModel& m, const Dataset& test);
Metrics evaluate_labels(std::span<const int> truth, std::span<const int> pred);

// Predicts label(t + h) as label(t).
Metrics persistence_baseline(const Dataset& test);

struct LeaderboardRow {
  std::size_t index = 0;
  Hyperparams hyperparams;
  double validation_f1 = 0.0;
};

struct GridResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<LeaderboardRow> leaderboard;  // grid order
};

// Validates on the last 20% of `train` (chronological). Throws EmptyGrid.
GridResult grid_search(const Dataset& train, const std::vector<Hyperparams>& grid, std::uint64_t seed);

std::string leaderboard_csv(const GridResult& r, const Provenance& prov);

}  // namespace burstcast
