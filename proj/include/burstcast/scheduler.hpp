#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "burstcast/csv.hpp"

namespace burstcast {

inline constexpr int kPatternSlots = 24;
inline constexpr double kSlotSeconds = 300.0;

struct JobProfile {
  std::string name;
  double min_time = 0.0;  // seconds with no burst overlap
  double max_time = 0.0;  // seconds under continuous burst
  bool operator==(const JobProfile&) const = default;
};

// Throws InvalidProfile.
void validate(const JobProfile& job);

// DLIO (850, 5000), App2 (1260, 3780), App3 (1830, 3660).
std::vector<JobProfile> paper_jobs();

struct BurstPattern {
  std::vector<std::uint8_t> slots;  // 1 = burst
  double interval = kSlotSeconds;

  // Slots past the end read as burst.
  bool burst(std::size_t i) const noexcept { return i >= slots.size() || slots[i] != 0; }
  std::size_t size() const noexcept { return slots.size(); }
  std::size_t burst_count() const noexcept;
  std::string bits() const;
  static BurstPattern from_bits(std::string_view bits, double interval = kSlotSeconds);  // throws InvalidPattern
  bool operator==(const BurstPattern&) const = default;
};

struct ScheduleDecision {
  int start_index = 0;
  double delay = 0.0;
  double est_run_time = 0.0;
  double score = 0.0;
};

// Whole slots a job needs when started at `start`. Work is counted in
// units of min_time / (a·b) with a = ceil(min/I), b = ceil(max/I): a clean
// slot completes b units, a burst slot a units.
std::int64_t slots_needed(const BurstPattern& p, const JobProfile& job, std::size_t start, double interval);

// Throws InvalidAlpha, InvalidProfile, InvalidPattern.
ScheduleDecision schedule(const BurstPattern& pattern, const JobProfile& job, double alpha,
                          double interval = kSlotSeconds, int horizon = kPatternSlots);

// Run time of a job started at `start_index` against the realized pattern.
double simulate_execution(const BurstPattern& realized, const JobProfile& job, int start_index,
                          double interval = kSlotSeconds);

// Run time when the first k slots are bursts, for k = 0..horizon.
std::vector<double> overlap_curve(const JobProfile& job, int horizon = kPatternSlots, double interval = kSlotSeconds);

struct PatternCount {
  BurstPattern pattern;
  std::uint64_t count = 0;
};

struct PatternSet {
  std::vector<PatternCount> patterns;  // sorted by bit string
  std::uint64_t total_windows = 0;     // windows holding at least one burst
};

// Sliding windows of `window` labels with at least one burst (label > 0).
// Throws PatternTooShort.
PatternSet extract_patterns(std::span<const int> labels, int window = kPatternSlots);

void write_patterns(const PatternSet& set, const std::filesystem::path& path, const Provenance& prov);
PatternSet read_patterns(const std::filesystem::path& path, Provenance* prov = nullptr);

struct Strategy {
  std::string name;
  double alpha = 0.0;
};

// MDT 1, W1 0.7, W2 0.6, W3 0.5, W4 0.4, MRT 0.
std::vector<Strategy> default_strategies();

// The schedule is chosen on `predicted`; run time is measured on `realized`.
struct PatternCase {
  BurstPattern predicted;
  BurstPattern realized;
  std::uint64_t count = 1;
};

std::vector<PatternCase> truth_cases(const PatternSet& set);

struct Outcome {
  double delay = 0.0;
  double run = 0.0;
  double total() const noexcept { return delay + run; }
};

struct StrategyJobResult {
  std::string strategy;
  double alpha = 0.0;
  std::string job;
  double mean_delay = 0.0;
  double mean_run = 0.0;
  double mean_total = 0.0;
  std::vector<Outcome> outcomes;  // one per case, same order
  std::vector<std::uint64_t> weights;
};

struct BatchReport {
  std::vector<StrategyJobResult> rows;  // strategy-major
};

BatchReport batch_evaluate(std::span<const PatternCase> cases, std::span<const JobProfile> jobs,
                           std::span<const Strategy> strategies, double interval = kSlotSeconds);
BatchReport batch_evaluate(const PatternSet& set, std::span<const JobProfile> jobs,
                           std::span<const Strategy> strategies, double interval = kSlotSeconds);

enum class OutcomeField { Delay, Run, Total };

struct CdfPoint {
  double value = 0.0;
  double cumulative_fraction = 0.0;
};

std::vector<CdfPoint> cdf(const StrategyJobResult& r, OutcomeField field);

std::string report_csv(const BatchReport& r, const Provenance& prov);
std::string cdf_csv(const BatchReport& r, OutcomeField field, const Provenance& prov);

}  // namespace burstcast
