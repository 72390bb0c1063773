#pragma once

#include <string>
#include <vector>

#include "burstcast/timeseries.hpp"

namespace burstcast {

struct BurstThreshold {
  Channel channel = Channel::Read;
  double k = 0.0;  // σ multiples above the mean
  double mean = 0.0;
  double stdev = 0.0;
  double cutoff_bytes = 0.0;  // mean + k·stdev
  double target_fraction = 0.01;
  double achieved_fraction = 0.0;
};

enum class LabelMode { Binary, Severity };

struct LabeledSeries {
  Channel channel = Channel::Read;
  LabelMode mode = LabelMode::Binary;
  std::vector<int> labels;  // one per bin
  BurstThreshold threshold;
  int levels = 1;  // highest class id
};

// Bisects k over [0, 400] for the labeled fraction nearest target_fraction;
// among equally near fractions the smallest k wins. Throws ZeroVariance,
// TooFewBins, InvalidFraction.
BurstThreshold compute_threshold(const BinSeries& s, Channel c, double target_fraction = 0.01);

// Manual threshold at a fixed k (e.g. 4.5 for read, 0.5 for write).
BurstThreshold threshold_at_k(const BinSeries& s, Channel c, double k, double target_fraction = 0.01);

// label 1 iff bytes > cutoff_bytes.
LabeledSeries label_binary(const BinSeries& s, Channel c, const BurstThreshold& t);

// 0 below the cutoff; bursts fall into `levels` equal σ-bands over
// [t.k, k_max), and anything at or above k_max lands in band `levels`.
// Throws InvalidBandConfig if t.k >= k_max or levels < 1.
LabeledSeries label_severity(const BinSeries& s, Channel c, const BurstThreshold& t,
                             double k_max = 10.0, int levels = 5);

std::string threshold_json(const BurstThreshold& t, const Provenance& p);
BurstThreshold parse_threshold_json(const std::string& text, Provenance* p = nullptr);

}  // namespace burstcast
