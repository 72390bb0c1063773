#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "burstcast/error.hpp"
#include "burstcast/features.hpp"
#include "burstcast/labeling.hpp"
#include "burstcast/models/metrics.hpp"
#include "burstcast/synth.hpp"
#include "burstcast/timeseries.hpp"
#include "support.hpp"

using namespace burstcast;
using testsupport::kind_of;

namespace {

BinSeries bin_corpus(const Corpus& c, std::int64_t w = 300) {
  std::vector<IoOperation> ops;
  for (const auto& log : c.logs) {
    const auto r = extract_io_operations(log.meta, log.records);
    ops.insert(ops.end(), r.operations.begin(), r.operations.end());
  }
  return bin_operations(ops, w);
}

// Binned series aligned to the ground-truth grid.
std::vector<double> aligned(const BinSeries& s, const GroundTruth& gt, Channel c) {
  std::vector<double> out(gt.read_burst.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t k = (s.timestamp(i) - gt.origin) / gt.bin_width;
    if (k >= 0 && k < static_cast<std::int64_t>(out.size())) out[static_cast<std::size_t>(k)] = s.bins[i].bytes(c);
  }
  return out;
}

SynthConfig quick(double hours) {
  SynthConfig cfg;
  cfg.duration = hours * 3600.0;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("a planted 3-bin write burst is recovered at its offset") {
  SynthConfig cfg = quick(12);
  cfg.bursts.push_back(PlantedBurst{40, 3, 10.0, Channel::Write});
  const Corpus c = synthesize(cfg);
  const auto writes = aligned(bin_corpus(c), c.truth, Channel::Write);
  REQUIRE(writes.size() == 144);
  const double base = std::exp(cfg.write_baseline.mu);
  for (std::size_t i = 0; i < writes.size(); ++i) {
    const bool in_burst = i >= 40 && i < 43;
    CHECK(c.truth.write_burst[i] == (in_burst ? 1 : 0));
    CHECK(c.truth.read_burst[i] == 0);
    if (in_burst) CHECK(writes[i] > 5.0 * base);
    else CHECK(writes[i] < 2.0 * base);
  }
}

TEST_CASE("emitted bytes match the configured schedule per bin") {
  SynthConfig cfg = quick(24);
  cfg.bursts.push_back(PlantedBurst{100, 5, 20.0, Channel::Read});
  cfg.ranks_per_job = 4;
  const Corpus c = synthesize(cfg);
  const BinSeries s = bin_corpus(c);
  for (Channel ch : {Channel::Read, Channel::Write}) {
    const auto got = aligned(s, c.truth, ch);
    const auto& want = ch == Channel::Read ? c.truth.read_bytes : c.truth.write_bytes;
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 0.05 * want[i]);
  }
}

TEST_CASE("output is a pure function of the config") {
  const auto d1 = testsupport::scratch("synth_a"), d2 = testsupport::scratch("synth_b");
  SynthConfig cfg = plant_predictable_bursts(quick(6));
  const SynthResult a = generate(cfg, d1, {"aa", 77, true});
  const SynthResult b = generate(cfg, d2, {"aa", 77, true});
  CHECK(a.file_count == b.file_count);
  CHECK(a.file_count > 0);
  std::size_t compared = 0;
  for (const auto& e : std::filesystem::directory_iterator(d1 / "logs")) {
    CHECK(read_text_file(e.path()) == read_text_file(d2 / "logs" / e.path().filename()));
    ++compared;
  }
  CHECK(compared == a.file_count);
  CHECK(read_text_file(d1 / "ground_truth.csv") == read_text_file(d2 / "ground_truth.csv"));
  SynthConfig other = cfg;
  other.seed = 78;
  CHECK(synthesize(other).logs != synthesize(cfg).logs);
}

TEST_CASE("generated files parse as Listing 1 style logs") {
  const auto dir = testsupport::scratch("synth_parse");
  const SynthResult r = generate(quick(3), dir);
  const ScanResult scan = scan_directory(dir / "logs", false, 1);
  CHECK(scan.jobs.size() == r.file_count);
  for (const auto& row : scan.report) CHECK(row.status == "ok");
  const std::string text = read_text_file(scan.jobs.front().path);
  CHECK(text.rfind("# uid: 336263\n# jobid: ", 0) == 0);
  CHECK(text.find("# start_time_asci: ") != std::string::npos);
  CHECK(text.find("POSIX\t0\t") != std::string::npos);
  CHECK(text.find("POSIX_F_READ_START_TIMESTAMP") != std::string::npos);
  const GroundTruth gt = load_ground_truth(dir / "ground_truth.csv");
  CHECK(gt.read_burst == r.truth.read_burst);
  CHECK(read_text_file(dir / "ground_truth.csv").find("bin_index,read_burst,write_burst\n") != std::string::npos);
}

TEST_CASE("zero arrival rate gives an empty corpus") {
  const auto dir = testsupport::scratch("synth_empty");
  SynthConfig cfg = quick(2);
  cfg.job_arrival_rate = 0.0;
  const SynthResult r = generate(cfg, dir);
  CHECK(r.file_count == 0);
  CHECK(r.truth.read_burst == std::vector<int>(24, 0));
  CHECK(r.truth.write_burst == std::vector<int>(24, 0));
  CHECK(std::filesystem::is_empty(dir / "logs"));
}

TEST_CASE("periodic bursts") {
  SynthConfig cfg;
  cfg.duration = 1200 * 300.0;
  cfg.job_arrival_rate = 2.0;
  const PeriodicBursts p;  // every 12th bin with a 2-bin ramp
  const Corpus c = synthesize(plant_predictable_bursts(cfg, p));
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.truth.read_burst.size(); ++i) {
    n += c.truth.read_burst[i];
    CHECK(c.truth.read_burst[i] == (i % 12 == 11 ? 1 : 0));
    CHECK(c.truth.write_burst[i] == c.truth.read_burst[i]);
  }
  CHECK(n == 100);
}

TEST_CASE("the ramp shows up as positive short MACD before each burst") {
  SynthConfig cfg;
  cfg.duration = 600 * 300.0;
  cfg.read_baseline.sigma = 0.05;
  PeriodicBursts p;
  p.period_bins = 24;
  p.magnitude = 10.0;
  const MacdConfig m{EmaConfig::from_window(60, 5), EmaConfig::from_window(130, 5)};

  const Corpus with = synthesize(plant_predictable_bursts(cfg, p));
  const auto xw = aligned(bin_corpus(with), with.truth, Channel::Read);
  const auto mw = macd(xw, m);
  p.ramp = false;
  const Corpus without = synthesize(plant_predictable_bursts(cfg, p));
  const auto xo = aligned(bin_corpus(without), without.truth, Channel::Read);
  const auto mo = macd(xo, m);

  // One bin ahead of each burst (after the long EMA has settled); the
  // previous burst has decayed by then.
  std::size_t pos_with = 0, pos_without = 0, checked = 0;
  for (std::size_t t = 10 * 24 + 23; t < xw.size(); t += 24) {
    REQUIRE(with.truth.read_burst[t] == 1);
    ++checked;
    pos_with += mw[t - 1] > 0.0 && mw[t - 1] > mw[t - 3];
    pos_without += mo[t - 1] > 0.0 && mo[t - 1] > mo[t - 3];
  }
  CHECK(checked > 5);
  CHECK(pos_with == checked);
  CHECK(pos_without == 0);
}

TEST_CASE("labels from the planted threshold match ground truth") {
  SynthConfig cfg;
  cfg.duration = 4 * 86400.0;
  cfg.bursts.push_back(PlantedBurst{300, 4, 10.0, Channel::Write});
  cfg.bursts.push_back(PlantedBurst{700, 1, 10.0, Channel::Read});
  const Corpus c = synthesize(plant_predictable_bursts(cfg, PeriodicBursts{37, -1, 10.0, true, 2, 3.0, {Channel::Read}}));
  const BinSeries s = bin_corpus(c);
  for (Channel ch : {Channel::Read, Channel::Write}) {
    const auto& mu = ch == Channel::Read ? cfg.read_baseline : cfg.write_baseline;
    // Geometric midpoint of the ramp peak and the burst magnitude.
    BurstThreshold t;
    t.cutoff_bytes = std::exp(mu.mu) * std::sqrt(3.0 * 10.0);
    const auto labels = label_binary(s, ch, t).labels;
    std::vector<int> pred(c.truth.read_burst.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto k = static_cast<std::size_t>((s.timestamp(i) - c.truth.origin) / 300);
      if (k < pred.size()) pred[k] = labels[i];
    }
    const auto& truth = ch == Channel::Read ? c.truth.read_burst : c.truth.write_burst;
    CHECK(evaluate_binary(truth, pred).f1 >= 0.95);
  }
}

TEST_CASE("config errors") {
  SynthConfig cfg = quick(1);
  cfg.bursts.push_back(PlantedBurst{10, 5, 10.0, Channel::Read});
  CHECK(kind_of([&] { synthesize(cfg); }) == ErrorKind::InfeasibleSchedule);
  cfg.bursts = {PlantedBurst{1, 1, 0.5, Channel::Read}};
  CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::InvalidConfig);
  SynthConfig neg = quick(1);
  neg.duration = -1;
  CHECK(kind_of([&] { validate(neg); }) == ErrorKind::InvalidConfig);
  SynthConfig ramp = plant_predictable_bursts(quick(1), PeriodicBursts{4, -1, 10.0, true, 4, 3.0, {Channel::Read}});
  CHECK(kind_of([&] { validate(ramp); }) == ErrorKind::InvalidConfig);
  const auto file = testsupport::scratch("synth_unwritable") / "plain_file";
  write_text_file(file, "x");
  CHECK(kind_of([&] { generate(quick(1), file / "sub"); }) == ErrorKind::UnwritableDirectory);
}
