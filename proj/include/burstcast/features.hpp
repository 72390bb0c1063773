#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "burstcast/models/matrix.hpp"
#include "burstcast/timeseries.hpp"

namespace burstcast {

// Window length → smoothing factor via α = 2 / (n + 1), n = window / bin.
struct EmaConfig {
  double window_minutes = 60.0;
  double alpha = 2.0 / 13.0;

  static EmaConfig from_window(double window_minutes, double bin_width_minutes);
};

struct MacdConfig {
  EmaConfig short_ema;
  EmaConfig long_ema;
};

// E_0 = x_0, E_t = α·x_t + (1−α)·E_{t−1}. Throws InvalidAlpha.
std::vector<double> ema(std::span<const double> values, double alpha);

// ema(short) − ema(long). Throws InvalidMacdConfig unless short window < long window.
std::vector<double> macd(std::span<const double> values, const MacdConfig& cfg);

struct FeatureMatrix {
  std::vector<std::string> names;
  Matrix rows;  // one row per bin
  std::vector<std::int64_t> timestamps;
};

struct FeatureOptions {
  // Feature set 1 with both channels' bytes instead of only the target's.
  bool set1_both_channels = false;
};

// Set 1: bytes. Set 2: bytes, ops, io time. Set 3: set 2 plus the 60, 130,
// 500 and 1000 minute EMAs of bytes and MACD(60,130), MACD(500,1000).
// Throws UnknownFeatureSet.
FeatureMatrix build_features(const BinSeries& s, Channel c, int set_id, const FeatureOptions& opt = {});

struct Dataset {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<int> y;                     // label at t + horizon
  std::vector<int> y_now;                 // label at t (persistence baseline)
  std::vector<std::int64_t> timestamps;   // feature timestamp of each row
  std::int64_t horizon_bins = 1;
  std::int64_t bin_width = 300;

  std::size_t rows() const noexcept { return y.size(); }
  Dataset slice(std::size_t begin, std::size_t end) const;
};

// Row t pairs features at t with labels[t + horizon]. Throws InvalidHorizon,
// HorizonTooLong, ArityMismatch.
Dataset build_dataset(const FeatureMatrix& f, std::span<const int> labels, std::int64_t horizon_bins,
                      std::int64_t bin_width = 300);

struct Split {
  Dataset train;
  Dataset test;
  std::size_t purged = 0;  // rows dropped between the halves
};

// Chronological split at floor(rows·fraction). The last horizon−1 training
// rows are purged so that no training label lies after the first test
// feature timestamp. Throws InvalidFraction, TooFewRows.
Split chrono_split(const Dataset& d, double train_fraction = 0.8);

std::string dataset_csv(const Dataset& d, const Provenance& p);

}  // namespace burstcast
