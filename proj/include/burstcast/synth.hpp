#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "burstcast/csv.hpp"
#include "burstcast/darshan.hpp"

namespace burstcast {

struct LogNormal {
  double mu = 0.0;
  double sigma = 0.0;
};

struct PlantedBurst {
  std::int64_t start_bin = 0;
  std::int64_t length_bins = 1;
  double magnitude = 10.0;  // multiplier over baseline
  Channel channel = Channel::Write;
};

// A burst every `period_bins` bins (at phase, phase + period, ...), each
// preceded by `ramp_bins` bins rising linearly towards ramp_peak × baseline.
struct PeriodicBursts {
  std::int64_t period_bins = 12;
  std::int64_t phase = -1;  // -1: period - 1
  double magnitude = 10.0;
  bool ramp = true;
  std::int64_t ramp_bins = 2;
  double ramp_peak = 3.0;
  std::vector<Channel> channels{Channel::Read, Channel::Write};
};

struct SynthConfig {
  double duration = 86400.0;  // seconds
  std::int64_t bin_width = 300;
  std::int64_t start_epoch = 1509271800;  // rounded down to bin_width
  double job_arrival_rate = 12.0;         // jobs per hour
  LogNormal job_length{8.0, 0.7};         // seconds
  LogNormal read_baseline{20.7, 0.2};     // bytes per bin
  LogNormal write_baseline{20.0, 0.2};
  double op_size = 1048576.0;             // mean bytes per operation
  std::vector<PlantedBurst> bursts;
  std::optional<PeriodicBursts> periodic;
  int ranks_per_job = 1;                  // > 1 spreads groups over ranks
  std::int64_t uid = 336263;
  std::uint64_t seed = 1;

  std::int64_t n_bins() const;
  std::int64_t origin() const { return start_epoch - ((start_epoch % bin_width) + bin_width) % bin_width; }
};

// Throws InvalidConfig, InfeasibleSchedule.
void validate(const SynthConfig& cfg);

struct GroundTruth {
  std::int64_t origin = 0;
  std::int64_t bin_width = 300;
  std::vector<int> read_burst;
  std::vector<int> write_burst;
  std::vector<double> read_bytes;  // intended bytes per bin
  std::vector<double> write_bytes;
};

struct SynthResult {
  std::size_t file_count = 0;
  GroundTruth truth;
};

// In-memory corpus: one ParsedLog per job, ordered by job id.
struct Corpus {
  std::vector<ParsedLog> logs;
  GroundTruth truth;
};

Corpus synthesize(const SynthConfig& cfg);

// Writes out_dir/logs/job_<id>.txt and out_dir/ground_truth.csv. Throws
// UnwritableDirectory.
SynthResult generate(const SynthConfig& cfg, const std::filesystem::path& out_dir, const Provenance& prov = {});

std::string ground_truth_csv(const GroundTruth& gt, const Provenance& prov);
GroundTruth load_ground_truth(const std::filesystem::path& path, std::int64_t bin_width = 300);

SynthConfig plant_predictable_bursts(SynthConfig cfg, const PeriodicBursts& periodic = {});

}  // namespace burstcast
