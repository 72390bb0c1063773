#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "burstcast/csv.hpp"
#include "burstcast/darshan.hpp"

namespace burstcast {

struct BinStats {
  double read_bytes = 0.0;
  double write_bytes = 0.0;
  double read_ops = 0.0;
  double write_ops = 0.0;
  double read_time = 0.0;
  double write_time = 0.0;

  double bytes(Channel c) const noexcept { return c == Channel::Read ? read_bytes : write_bytes; }
  double ops(Channel c) const noexcept { return c == Channel::Read ? read_ops : write_ops; }
  double time(Channel c) const noexcept { return c == Channel::Read ? read_time : write_time; }

  BinStats& operator+=(const BinStats& o) noexcept;
  bool operator==(const BinStats&) const = default;
};

// Dense run of fixed-width bins. Bin i covers [origin + i·w, origin + (i+1)·w).
struct BinSeries {
  std::int64_t bin_width = 300;  // seconds
  std::int64_t origin = 0;       // epoch seconds, multiple of bin_width
  std::vector<BinStats> bins;

  std::size_t size() const noexcept { return bins.size(); }
  bool empty() const noexcept { return bins.empty(); }
  std::int64_t timestamp(std::size_t i) const noexcept {
    return origin + static_cast<std::int64_t>(i) * bin_width;
  }
  std::vector<double> channel_bytes(Channel c) const;
  std::vector<double> channel_ops(Channel c) const;
  std::vector<double> channel_time(Channel c) const;

  bool operator==(const BinSeries&) const = default;
};

// Each op is split equally across every bin its closed interval touches.
BinSeries bin_operations(std::span<const IoOperation> ops, std::int64_t bin_width);

// Element-wise sum over the union range. Throws WidthMismatch.
BinSeries merge(const BinSeries& a, const BinSeries& b);

// Sums groups of `factor` bins. Groups are aligned to multiples of the new
// width from the epoch so the result keeps an aligned origin; partial edge
// groups are zero-padded. Throws InvalidFactor.
BinSeries rebin(const BinSeries& s, std::int64_t factor);

struct ChannelStats {
  Channel channel = Channel::Read;
  double mean = 0.0;
  double stdev = 0.0;  // population
  std::size_t n = 0;
};

// Throws TooFewBins for fewer than 2 bins.
ChannelStats channel_stats(const BinSeries& s, Channel c);
ChannelStats channel_stats(std::span<const double> values, Channel c);

struct DeviationHistogram {
  static constexpr double kStep = 0.2;  // σ per group
  static constexpr double kCap = 10.0;  // σ
  static constexpr int kGroups = 100;   // [-10σ, 10σ) in 0.2σ steps

  // counts[i] covers z ∈ [−10 + 0.2·i, −10 + 0.2·(i+1)).
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(kGroups, 0);
  std::uint64_t below_cap = 0;  // z < −10
  std::uint64_t above_cap = 0;  // z ≥ 10

  std::uint64_t total() const noexcept;
  static double group_lower(int i) noexcept { return -kCap + kStep * i; }
};

// Throws ZeroVariance if stats.stdev is not positive.
DeviationHistogram deviation_histogram(const BinSeries& s, Channel c, const ChannelStats& stats);

struct RunLengths {
  std::vector<std::size_t> lengths;                  // in order of occurrence
  std::map<std::size_t, std::size_t> by_length;      // length → number of runs
  std::size_t singles() const noexcept;              // runs of length 1
  std::size_t total_ones() const noexcept;
};

RunLengths run_lengths(std::span<const int> labels);

// CSV: timestamp,read_bytes,write_bytes,read_ops,write_ops,read_time,write_time
// `extra` appends named integer columns (labels) of equal length.
struct ExtraColumn {
  std::string name;
  std::vector<int> values;
};
std::string bin_series_csv(const BinSeries& s, const Provenance& p,
                           const std::vector<ExtraColumn>& extra = {});

struct LoadedBins {
  BinSeries series;
  Provenance provenance;
  std::map<std::string, std::vector<int>> extra;
};
// The bin width is inferred from consecutive timestamps; a single-row file
// needs `bin_width_hint`.
LoadedBins load_bin_series_csv(const std::filesystem::path& path, std::int64_t bin_width_hint = 300);

}  // namespace burstcast
