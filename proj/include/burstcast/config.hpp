#pragma once

// Flat "key = value" config. Values are numbers, booleans, quoted or bare
// strings, or [a, b, ...] lists; "[section]" lines prefix later keys with
// "section.". '#' starts a comment.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "burstcast/darshan.hpp"
#include "burstcast/models/hyperparams.hpp"
#include "burstcast/scheduler.hpp"
#include "burstcast/synth.hpp"

namespace burstcast {

// Raw key -> list of scalar tokens (one token for scalars).
using ConfigMap = std::map<std::string, std::vector<std::string>>;

// Throws InvalidConfig with the line number.
ConfigMap parse_config_text(std::string_view text);
// "key=value" override, same value syntax.
void apply_override(ConfigMap& m, std::string_view assignment);

struct FamilyGrid {
  Family family = Family::Boosting;
  // Parameter name -> candidate values, expanded as a cartesian product in
  // key order. Empty: defaults only, no search.
  std::map<std::string, std::vector<std::string>> axes;

  std::vector<Hyperparams> expand(bool class_weighted) const;
};

struct RunConfig {
  std::filesystem::path work_dir = "work";
  std::filesystem::path logs_dir;  // empty: <work_dir>/synth/logs
  bool recursive = true;
  int threads = 0;                 // 0: hardware concurrency

  std::int64_t bin_width = 300;
  std::vector<Channel> channels{Channel::Read, Channel::Write};
  double target_fraction = 0.01;
  std::map<Channel, double> k_override;
  double k_max = 10.0;
  int levels = 5;
  std::string label_mode = "binary";  // binary | severity

  std::vector<int> feature_sets{3};
  bool set1_both_channels = false;
  std::string horizon_mode = "lead";  // lead | rebin
  std::vector<int> horizons_minutes;  // default 5, 10, ..., 120
  double train_fraction = 0.8;

  std::vector<FamilyGrid> families;   // default: gbt with no grid
  bool class_weighted = false;

  std::uint64_t seed = 42;

  Channel schedule_channel = Channel::Read;
  std::string predict_mode = "horizon";  // horizon | sliding
  std::string simulate_mode = "truth";   // truth | predicted
  std::vector<Strategy> strategies;
  std::vector<JobProfile> jobs;

  SynthConfig synth;

  std::filesystem::path resolved_logs_dir() const;
  std::vector<std::int64_t> horizon_bins() const;
  // FNV-1a over every setting that shapes artifact contents (paths and
  // thread count excluded), as 16 hex digits.
  std::string hash() const;
  std::string canonical() const;
};

// Throws InvalidConfig on unknown keys or bad values.
RunConfig build_run_config(const ConfigMap& m);
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(std::string_view text);

}  // namespace burstcast
