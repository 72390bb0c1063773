#pragma once

// Subcommands over a work directory. Each stage reads the previous stage's
// artifacts, checks they carry the current config hash, and rewrites its
// own outputs deterministically.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "burstcast/config.hpp"
#include "burstcast/features.hpp"
#include "burstcast/timeseries.hpp"

namespace burstcast {

namespace artifacts {
std::filesystem::path synth_dir(const RunConfig& c);
std::filesystem::path ground_truth(const RunConfig& c);
std::filesystem::path ingest_report(const RunConfig& c);
std::filesystem::path bins(const RunConfig& c);
std::filesystem::path labels(const RunConfig& c);
std::filesystem::path threshold(const RunConfig& c, Channel ch);
std::filesystem::path analysis_dir(const RunConfig& c);
std::filesystem::path models_dir(const RunConfig& c);
std::filesystem::path model(const RunConfig& c, Family f, Channel ch, int set, int horizon_minutes);
std::filesystem::path metrics(const RunConfig& c);
std::filesystem::path pattern(const RunConfig& c);
std::filesystem::path schedule(const RunConfig& c);
std::filesystem::path patterns(const RunConfig& c);
std::filesystem::path simulation(const RunConfig& c);
std::filesystem::path report_dir(const RunConfig& c);
}  // namespace artifacts

// Advisory lock on the work dir for the duration of one command. Throws
// LockHeld if another command holds it.
class WorkLock {
 public:
  explicit WorkLock(const std::filesystem::path& work_dir);
  ~WorkLock();
  WorkLock(const WorkLock&) = delete;
  WorkLock& operator=(const WorkLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> notes;  // one-line summaries for the console
};

Provenance provenance_of(const RunConfig& c);

// Datasets as train/evaluate build them for one (channel, set, horizon) cell.
Dataset cell_dataset(const RunConfig& c, const LoadedBins& labeled, Channel ch, int set, int horizon_minutes);

CommandResult run_synth(const RunConfig& c);
CommandResult run_ingest(const RunConfig& c);
CommandResult run_label(const RunConfig& c);
CommandResult run_analyze(const RunConfig& c);
CommandResult run_train(const RunConfig& c);
CommandResult run_evaluate(const RunConfig& c);
// `bins` defaults to the labeled bins of the work dir. With `model` set, the
// 24 slots are that model's predictions for the last 24 rows (sliding mode);
// otherwise slot j comes from the (j+1)-bin horizon model on the last row.
CommandResult run_predict(const RunConfig& c, const std::optional<std::filesystem::path>& bins = std::nullopt,
                          const std::optional<std::filesystem::path>& model = std::nullopt);
CommandResult run_schedule(const RunConfig& c);
CommandResult run_simulate(const RunConfig& c);
CommandResult run_report(const RunConfig& c);

// synth through report in order; ingest-only corpora skip synth when
// logs_dir is set.
CommandResult run_all(const RunConfig& c);

}  // namespace burstcast
