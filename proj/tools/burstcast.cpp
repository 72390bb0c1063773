// burstcast: I/O burst prediction and burst-aware scheduling pipeline.

#include <CLI11.hpp>
#include <iostream>

#include "burstcast/config.hpp"
#include "burstcast/error.hpp"
#include "burstcast/kernels.hpp"
#include "burstcast/pipeline.hpp"

using namespace burstcast;

namespace {

struct Globals {
  std::string config;
  std::vector<std::string> overrides;
  std::string work_dir;
  std::string isa;
  bool quiet = false;
};

int report_error(const std::string& kind, const std::string& msg) {
  std::cerr << "error: " << kind << ": " << msg << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"I/O burst prediction and burst-aware scheduling"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config, "Config file (key = value)");
  app.add_option("-s,--set", g.overrides, "Override a config key, e.g. --set seed=7");
  app.add_option("-w,--work-dir", g.work_dir, "Work directory (overrides work_dir)");
  app.add_option("--isa", g.isa, "Kernel variant")->check(CLI::IsMember({"scalar", "avx2"}));
  app.add_flag("-q,--quiet", g.quiet, "Print nothing on success");

  std::string bins, model;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"synth", "Generate a synthetic Darshan-format corpus with ground truth"},
      {"ingest", "Parse logs and bin cluster I/O into bins.csv"},
      {"label", "Compute burst thresholds and per-bin labels"},
      {"analyze", "Deviation histograms, run lengths and hourly profiles"},
      {"train", "Train one model per (channel, feature set, horizon, family)"},
      {"evaluate", "Score models and the persistence baseline on the test split"},
      {"predict", "Emit a 24-slot burst pattern"},
      {"schedule", "Pick start slots for each job and strategy from the pattern"},
      {"simulate", "Batch strategy simulation over extracted patterns"},
      {"report", "Assemble report tables and plots"},
      {"run", "Run every stage in order"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    if (std::string(s.name) == "predict") {
      sub->add_option("--bins", bins, "Bins CSV to predict from (default: work dir labels.csv)");
      sub->add_option("--model", model, "Single model file; predicts the last 24 rows");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!g.isa.empty()) kernels::set_active_isa(g.isa == "avx2" ? kernels::Isa::Avx2 : kernels::Isa::Scalar);
    std::vector<std::string> overrides = g.overrides;
    if (!g.work_dir.empty()) overrides.push_back("work_dir=" + g.work_dir);
    const RunConfig cfg = load_run_config(g.config, overrides);
    const std::string cmd = app.get_subcommands().front()->get_name();

    WorkLock lock(cfg.work_dir);
    CommandResult r;
    if (cmd == "synth") r = run_synth(cfg);
    else if (cmd == "ingest") r = run_ingest(cfg);
    else if (cmd == "label") r = run_label(cfg);
    else if (cmd == "analyze") r = run_analyze(cfg);
    else if (cmd == "train") r = run_train(cfg);
    else if (cmd == "evaluate") r = run_evaluate(cfg);
    else if (cmd == "predict")
      r = run_predict(cfg, bins.empty() ? std::nullopt : std::optional<std::filesystem::path>(bins),
                      model.empty() ? std::nullopt : std::optional<std::filesystem::path>(model));
    else if (cmd == "schedule") r = run_schedule(cfg);
    else if (cmd == "simulate") r = run_simulate(cfg);
    else if (cmd == "report") r = run_report(cfg);
    else r = run_all(cfg);
    if (!g.quiet)
      for (const auto& n : r.notes) std::cout << n << '\n';
    return 0;
  } catch (const Error& e) {
    return report_error(std::string(e.kind_name()), e.what());
  } catch (const std::exception& e) {
    return report_error("Internal", e.what());
  }
}
