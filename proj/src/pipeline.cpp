#include "burstcast/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "burstcast/error.hpp"
#include "burstcast/labeling.hpp"
#include "burstcast/models/grid_search.hpp"
#include "burstcast/models/model.hpp"
#include "burstcast/scheduler.hpp"
#include "burstcast/synth.hpp"

namespace burstcast {

namespace fs = std::filesystem;

namespace artifacts {
fs::path synth_dir(const RunConfig& c) { return c.work_dir / "synth"; }
fs::path ground_truth(const RunConfig& c) { return synth_dir(c) / "ground_truth.csv"; }
fs::path ingest_report(const RunConfig& c) { return c.work_dir / "ingest_report.csv"; }
fs::path bins(const RunConfig& c) { return c.work_dir / "bins.csv"; }
fs::path labels(const RunConfig& c) { return c.work_dir / "labels.csv"; }
fs::path threshold(const RunConfig& c, Channel ch) {
  return c.work_dir / ("threshold_" + std::string(channel_name(ch)) + ".json");
}
fs::path analysis_dir(const RunConfig& c) { return c.work_dir / "analysis"; }
fs::path models_dir(const RunConfig& c) { return c.work_dir / "models"; }
fs::path model(const RunConfig& c, Family f, Channel ch, int set, int horizon_minutes) {
  return models_dir(c) / (std::string(family_name(f)) + "_" + std::string(channel_name(ch)) + "_set" +
                          std::to_string(set) + "_h" + std::to_string(horizon_minutes) + ".json");
}
fs::path metrics(const RunConfig& c) { return c.work_dir / "metrics.csv"; }
fs::path pattern(const RunConfig& c) { return c.work_dir / "pattern.txt"; }
fs::path schedule(const RunConfig& c) { return c.work_dir / "schedule.csv"; }
fs::path patterns(const RunConfig& c) { return c.work_dir / "patterns.txt"; }
fs::path simulation(const RunConfig& c) { return c.work_dir / "simulation.csv"; }
fs::path report_dir(const RunConfig& c) { return c.work_dir / "report"; }
}  // namespace artifacts

WorkLock::WorkLock(const fs::path& work_dir) : path_(work_dir / ".burstcast.lock") {
  std::error_code ec;
  fs::create_directories(work_dir, ec);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST)
      fail(ErrorKind::LockHeld, "work dir is locked by another command (" + path_.string() +
                                    "); remove it if no command is running");
    fail(ErrorKind::UnwritableDirectory, "cannot create lock file " + path_.string());
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  (void)!::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkLock::~WorkLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Provenance provenance_of(const RunConfig& c) { return Provenance{c.hash(), c.seed, true}; }

namespace {

std::string label_column(Channel ch) { return std::string(channel_name(ch)) + "_label"; }
std::string severity_column(Channel ch) { return std::string(channel_name(ch)) + "_severity"; }

void require(const fs::path& p, const std::string& stage) {
  if (!fs::exists(p))
    fail(ErrorKind::MissingArtifact, p.string() + " is missing; run `burstcast " + stage + "` first");
}

void check_hash(const Provenance& p, const RunConfig& c, const fs::path& what, const std::string& stage) {
  if (!p.present)
    fail(ErrorKind::ConfigHashMismatch, what.string() + " carries no config hash; re-run `burstcast " + stage + "`");
  if (p.config_hash != c.hash() || p.seed != c.seed)
    fail(ErrorKind::ConfigHashMismatch, what.string() + " was produced with config " + p.config_hash + " seed " +
                                            std::to_string(p.seed) + ", current is " + c.hash() + " seed " +
                                            std::to_string(c.seed) + "; re-run `burstcast " + stage + "`");
}

Provenance file_provenance(const fs::path& p) {
  std::ifstream in(p);
  std::string first;
  std::getline(in, first);
  if (!first.starts_with("#")) return {};
  std::istringstream one(first + "\n");
  return parse_csv(one).provenance;
}

void check_csv(const RunConfig& c, const fs::path& p, const std::string& stage) {
  require(p, stage);
  check_hash(file_provenance(p), c, p, stage);
}

LoadedBins load_labeled(const RunConfig& c) {
  const auto p = artifacts::labels(c);
  require(p, "label");
  LoadedBins lb = load_bin_series_csv(p, c.bin_width);
  check_hash(lb.provenance, c, p, "label");
  return lb;
}

const std::vector<int>& column(const LoadedBins& lb, const std::string& name) {
  auto it = lb.extra.find(name);
  if (it == lb.extra.end())
    fail(ErrorKind::MissingArtifact, "labels.csv has no '" + name + "' column; re-run `burstcast label`");
  return it->second;
}

std::string active_label_column(const RunConfig& c, Channel ch) {
  return c.label_mode == "severity" ? severity_column(ch) : label_column(ch);
}

BurstThreshold make_threshold(const RunConfig& c, const BinSeries& s, Channel ch) {
  auto k = c.k_override.find(ch);
  return k != c.k_override.end() ? threshold_at_k(s, ch, k->second, c.target_fraction)
                                 : compute_threshold(s, ch, c.target_fraction);
}

Metrics score(const RunConfig& c, std::span<const int> truth, std::span<const int> pred) {
  return c.label_mode == "severity" ? evaluate_macro(truth, pred) : evaluate_binary(truth, pred, 1);
}

// Runs fn(i) for i in [0, n) on a few workers; rethrows the exception of the
// lowest failing index.
template <typename F>
void parallel_for(std::size_t n, int threads, F fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Cell {
  Channel channel;
  int feature_set;
  int horizon_minutes;
  std::size_t family_index;
};

std::vector<Cell> cells(const RunConfig& c) {
  std::vector<Cell> out;
  for (Channel ch : c.channels)
    for (int set : c.feature_sets)
      for (int h : c.horizons_minutes)
        for (std::size_t f = 0; f < c.families.size(); ++f) out.push_back({ch, set, h, f});
  return out;
}

TrainedModel load_checked_model(const RunConfig& c, const fs::path& p) {
  require(p, "train");
  TrainedModel m = load_model(p);
  if (m.meta.config_hash != c.hash() || m.meta.seed != c.seed)
    fail(ErrorKind::ConfigHashMismatch, p.string() + " was trained with config " + m.meta.config_hash +
                                            ", current is " + c.hash() + "; re-run `burstcast train`");
  return m;
}

void check_features(const TrainedModel& m, const std::vector<std::string>& names, const fs::path& p) {
  if (m.feature_names != names)
    fail(ErrorKind::SchemaMismatch, p.string() + " expects features that differ from the current feature set");
}

std::string svg_line_chart(const Provenance& prov, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& lines) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [_, pts] : lines)
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double W = 640, H = 400, L = 60, R = 160, T = 30, B = 50;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<!-- config_hash=" << prov.config_hash << " seed=" << prov.seed << " -->\n";
  o << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\">" << xlabel << "</text>\n";
  o << "<text x=\"12\" y=\"" << T + 10 << "\" font-size=\"12\">" << ylabel << "</text>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\" font-size=\"10\">" << format_double(x0) << "</text>\n";
  o << "<text x=\"" << W - R - 30 << "\" y=\"" << H - B + 15 << "\" font-size=\"10\">" << format_double(x1)
    << "</text>\n";
  o << "<text x=\"4\" y=\"" << H - B << "\" font-size=\"10\">" << format_double(y0) << "</text>\n";
  o << "<text x=\"4\" y=\"" << T + 24 << "\" font-size=\"10\">" << format_double(y1) << "</text>\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const char* col = colors[i % 8];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    for (const auto& [x, y] : lines[i].second) o << px(x) << ',' << py(y) << ' ';
    o << "\"/>\n<text x=\"" << W - R + 8 << "\" y=\"" << T + 14 * (i + 1) << "\" font-size=\"10\" fill=\"" << col
      << "\">" << lines[i].first << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

Dataset cell_dataset(const RunConfig& c, const LoadedBins& labeled, Channel ch, int set, int horizon_minutes) {
  const FeatureOptions opt{c.set1_both_channels};
  const std::int64_t w = labeled.series.bin_width;
  const std::int64_t bins = static_cast<std::int64_t>(horizon_minutes) * 60 / w;
  if (c.horizon_mode == "lead") {
    const FeatureMatrix f = build_features(labeled.series, ch, set, opt);
    return build_dataset(f, column(labeled, active_label_column(c, ch)), bins, w);
  }
  // Rebin mode: predict the next coarse bin.
  const BinSeries coarse = rebin(labeled.series, bins);
  const BurstThreshold t = make_threshold(c, coarse, ch);
  const LabeledSeries ls =
      c.label_mode == "severity" ? label_severity(coarse, ch, t, c.k_max, c.levels) : label_binary(coarse, ch, t);
  const FeatureMatrix f = build_features(coarse, ch, set, opt);
  return build_dataset(f, ls.labels, 1, coarse.bin_width);
}

// ---- stages -------------------------------------------------------------

CommandResult run_synth(const RunConfig& c) {
  CommandResult r;
  const SynthResult s = generate(c.synth, artifacts::synth_dir(c), provenance_of(c));
  std::size_t rb = 0, wb = 0;
  for (int v : s.truth.read_burst) rb += v;
  for (int v : s.truth.write_burst) wb += v;
  r.written = {artifacts::synth_dir(c) / "logs", artifacts::ground_truth(c)};
  r.notes.push_back("synth: " + std::to_string(s.file_count) + " log files, " +
                    std::to_string(s.truth.read_burst.size()) + " bins, planted bursts read=" + std::to_string(rb) +
                    " write=" + std::to_string(wb));
  return r;
}

CommandResult run_ingest(const RunConfig& c) {
  const fs::path logs = c.resolved_logs_dir();
  if (!fs::is_directory(logs))
    fail(ErrorKind::MissingArtifact, logs.string() + " is not a directory; run `burstcast synth` or set logs_dir");
  const ScanResult scan = scan_directory(logs, c.recursive, static_cast<unsigned>(std::max(0, c.threads)));
  std::vector<IoOperation> ops;
  for (const auto& j : scan.jobs) ops.insert(ops.end(), j.operations.begin(), j.operations.end());
  const BinSeries s = bin_operations(ops, c.bin_width);
  const Provenance prov = provenance_of(c);

  std::ostringstream rep;
  write_provenance(rep, prov);
  rep << ingest_report_csv(scan.report);
  write_text_file(artifacts::ingest_report(c), rep.str());
  write_text_file(artifacts::bins(c), bin_series_csv(s, prov));

  std::size_t skipped = 0;
  for (const auto& row : scan.report) skipped += row.status != "ok";
  CommandResult r;
  r.written = {artifacts::ingest_report(c), artifacts::bins(c)};
  r.notes.push_back("ingest: " + std::to_string(scan.jobs.size()) + " jobs, " + std::to_string(skipped) +
                    " skipped files, " + std::to_string(ops.size()) + " operations, " + std::to_string(s.size()) +
                    " bins");
  return r;
}

CommandResult run_label(const RunConfig& c) {
  const auto bins_path = artifacts::bins(c);
  require(bins_path, "ingest");
  const LoadedBins lb = load_bin_series_csv(bins_path, c.bin_width);
  check_hash(lb.provenance, c, bins_path, "ingest");
  const Provenance prov = provenance_of(c);
  CommandResult r;
  std::vector<ExtraColumn> extra;
  for (Channel ch : c.channels) {
    const BurstThreshold t = make_threshold(c, lb.series, ch);
    extra.push_back({label_column(ch), label_binary(lb.series, ch, t).labels});
    if (t.k < c.k_max) {
      extra.push_back({severity_column(ch), label_severity(lb.series, ch, t, c.k_max, c.levels).labels});
    } else if (c.label_mode == "severity") {
      fail(ErrorKind::InvalidBandConfig, std::string(channel_name(ch)) + " threshold k is not below k_max");
    }
    write_text_file(artifacts::threshold(c, ch), threshold_json(t, prov));
    r.written.push_back(artifacts::threshold(c, ch));
    r.notes.push_back("label " + std::string(channel_name(ch)) + ": k=" + format_double(t.k) +
                      " cutoff=" + format_double(t.cutoff_bytes) + " achieved=" + format_double(t.achieved_fraction));
  }
  write_text_file(artifacts::labels(c), bin_series_csv(lb.series, prov, extra));
  r.written.push_back(artifacts::labels(c));
  return r;
}

CommandResult run_analyze(const RunConfig& c) {
  const LoadedBins lb = load_labeled(c);
  const Provenance prov = provenance_of(c);
  const fs::path dir = artifacts::analysis_dir(c);
  CommandResult r;
  std::ostringstream stats;
  write_provenance(stats, prov);
  stats << "channel,mean,stdev,n,k,cutoff_bytes,target_fraction,achieved_fraction,max_sigma\n";
  for (Channel ch : c.channels) {
    const std::string name(channel_name(ch));
    const auto tpath = artifacts::threshold(c, ch);
    require(tpath, "label");
    Provenance tp;
    const BurstThreshold t = parse_threshold_json(read_text_file(tpath), &tp);
    check_hash(tp, c, tpath, "label");
    const ChannelStats cs = channel_stats(lb.series, ch);
    double max_sigma = 0.0;
    if (cs.stdev > 0.0)
      for (const auto& b : lb.series.bins) max_sigma = std::max(max_sigma, (b.bytes(ch) - cs.mean) / cs.stdev);
    stats << name << ',' << format_double(cs.mean) << ',' << format_double(cs.stdev) << ',' << cs.n << ','
          << format_double(t.k) << ',' << format_double(t.cutoff_bytes) << ',' << format_double(t.target_fraction)
          << ',' << format_double(t.achieved_fraction) << ',' << format_double(max_sigma) << '\n';

    std::ostringstream hist;
    write_provenance(hist, prov);
    hist << "group_lower_sigma,group_upper_sigma,count\n";
    if (cs.stdev > 0.0) {
      const DeviationHistogram h = deviation_histogram(lb.series, ch, cs);
      hist << "-inf,-10," << h.below_cap << '\n';
      for (int i = 0; i < DeviationHistogram::kGroups; ++i)
        hist << format_double(DeviationHistogram::group_lower(i)) << ','
             << format_double(DeviationHistogram::group_lower(i + 1)) << ',' << h.counts[static_cast<std::size_t>(i)]
             << '\n';
      hist << "10,inf," << h.above_cap << '\n';
    }
    write_text_file(dir / ("deviation_" + name + ".csv"), hist.str());

    const RunLengths rl = run_lengths(column(lb, label_column(ch)));
    std::ostringstream runs;
    write_provenance(runs, prov);
    runs << "run_length,runs\n";
    for (const auto& [len, n] : rl.by_length) runs << len << ',' << n << '\n';
    write_text_file(dir / ("run_lengths_" + name + ".csv"), runs.str());

    std::vector<double> hour_sum(24, 0.0);
    std::vector<std::size_t> hour_n(24, 0);
    for (std::size_t i = 0; i < lb.series.size(); ++i) {
      const auto hour = static_cast<std::size_t>(((lb.series.timestamp(i) % 86400) + 86400) % 86400 / 3600);
      hour_sum[hour] += lb.series.bins[i].bytes(ch);
      ++hour_n[hour];
    }
    std::ostringstream hourly;
    write_provenance(hourly, prov);
    hourly << "hour_utc,mean_bytes,bins\n";
    for (std::size_t hr = 0; hr < 24; ++hr)
      hourly << hr << ',' << format_double(hour_n[hr] ? hour_sum[hr] / static_cast<double>(hour_n[hr]) : 0.0) << ','
             << hour_n[hr] << '\n';
    write_text_file(dir / ("hourly_" + name + ".csv"), hourly.str());

    if (lb.extra.count(severity_column(ch))) {
      std::map<int, std::size_t> counts;
      for (int v : lb.extra.at(severity_column(ch))) ++counts[v];
      std::ostringstream sev;
      write_provenance(sev, prov);
      sev << "class,bins,fraction\n";
      for (int k = 0; k <= c.levels; ++k)
        sev << k << ',' << counts[k] << ','
            << format_double(lb.series.size() ? static_cast<double>(counts[k]) / static_cast<double>(lb.series.size()) : 0.0)
            << '\n';
      write_text_file(dir / ("severity_" + name + ".csv"), sev.str());
    }
    r.notes.push_back("analyze " + name + ": mean=" + format_double(cs.mean) + " stdev=" + format_double(cs.stdev) +
                      " bursts=" + std::to_string(rl.total_ones()) + " runs=" + std::to_string(rl.lengths.size()) +
                      " singles=" + std::to_string(rl.singles()));
  }
  write_text_file(dir / "stats.csv", stats.str());
  r.written.push_back(dir);
  return r;
}

CommandResult run_train(const RunConfig& c) {
  const LoadedBins lb = load_labeled(c);
  const auto all = cells(c);
  const Provenance prov = provenance_of(c);
  std::vector<std::string> notes(all.size());
  parallel_for(all.size(), c.threads, [&](std::size_t i) {
    const Cell& cell = all[i];
    const FamilyGrid& fam = c.families[cell.family_index];
    const Dataset d = cell_dataset(c, lb, cell.channel, cell.feature_set, cell.horizon_minutes);
    const Split split = chrono_split(d, c.train_fraction);
    const auto grid = fam.expand(c.class_weighted);
    Hyperparams hp = grid.front();
    const fs::path path = artifacts::model(c, fam.family, cell.channel, cell.feature_set, cell.horizon_minutes);
    if (grid.size() > 1) {
      const GridResult gr = grid_search(split.train, grid, c.seed);
      hp = gr.best;
      fs::path lpath = path;
      lpath.replace_extension();
      write_text_file(lpath.string() + "_leaderboard.csv", leaderboard_csv(gr, prov));
    }
    TrainedModel m = train(split.train, hp, c.seed);
    m.meta.channel = std::string(channel_name(cell.channel));
    m.meta.feature_set = cell.feature_set;
    m.meta.config_hash = c.hash();
    save_model(m, path);
    notes[i] = path.filename().string();
  });
  CommandResult r;
  r.written.push_back(artifacts::models_dir(c));
  r.notes.push_back("train: " + std::to_string(all.size()) + " models in " + artifacts::models_dir(c).string());
  return r;
}

CommandResult run_evaluate(const RunConfig& c) {
  const LoadedBins lb = load_labeled(c);
  const auto all = cells(c);
  struct Row {
    std::string model;
    int set;
    int minutes;
    Channel ch;
    Metrics m;
    std::size_t rows;
  };
  std::vector<Row> rows(all.size());
  parallel_for(all.size(), c.threads, [&](std::size_t i) {
    const Cell& cell = all[i];
    const Family fam = c.families[cell.family_index].family;
    const fs::path path = artifacts::model(c, fam, cell.channel, cell.feature_set, cell.horizon_minutes);
    const TrainedModel m = load_checked_model(c, path);
    const Dataset d = cell_dataset(c, lb, cell.channel, cell.feature_set, cell.horizon_minutes);
    check_features(m, d.feature_names, path);
    const Split split = chrono_split(d, c.train_fraction);
    const auto pred = predict(m, split.test.X);
    rows[i] = {std::string(family_name(fam)), cell.feature_set, cell.horizon_minutes, cell.channel,
               score(c, split.test.y, pred), split.test.rows()};
  });
  for (Channel ch : c.channels)
    for (int h : c.horizons_minutes) {
      const Dataset d = cell_dataset(c, lb, ch, c.feature_sets.front(), h);
      const Split split = chrono_split(d, c.train_fraction);
      rows.push_back({"persistence", 0, h, ch, score(c, split.test.y, split.test.y_now), split.test.rows()});
    }

  const Provenance prov = provenance_of(c);
  std::ostringstream out, per_class, confusion;
  for (auto* s : {&out, &per_class, &confusion}) write_provenance(*s, prov);
  out << "model,feature_set,horizon_minutes,channel,label_mode,precision,recall,f1,zero_division,tp,fp,fn,test_rows\n";
  per_class << "model,feature_set,horizon_minutes,channel,class,precision,recall,f1,support\n";
  confusion << "model,feature_set,horizon_minutes,channel,true_class,predicted_class,count\n";
  for (const auto& row : rows) {
    const std::string key = row.model + ',' + std::to_string(row.set) + ',' + std::to_string(row.minutes) + ',' +
                            std::string(channel_name(row.ch));
    out << key << ',' << c.label_mode << ',' << format_double(row.m.precision) << ',' << format_double(row.m.recall)
        << ',' << format_double(row.m.f1) << ',' << (row.m.zero_division ? 1 : 0) << ',' << row.m.tp << ','
        << row.m.fp << ',' << row.m.fn << ',' << row.rows << '\n';
    for (const auto& pc : row.m.per_class)
      per_class << key << ',' << pc.cls << ',' << format_double(pc.precision) << ',' << format_double(pc.recall)
                << ',' << format_double(pc.f1) << ',' << pc.support << '\n';
    for (std::size_t t = 0; t < row.m.classes.size(); ++t)
      for (std::size_t p = 0; p < row.m.classes.size(); ++p)
        confusion << key << ',' << row.m.classes[t] << ',' << row.m.classes[p] << ',' << row.m.confusion[t][p]
                  << '\n';
  }
  write_text_file(artifacts::metrics(c), out.str());
  write_text_file(c.work_dir / "metrics_per_class.csv", per_class.str());
  write_text_file(c.work_dir / "metrics_confusion.csv", confusion.str());
  CommandResult r;
  r.written = {artifacts::metrics(c), c.work_dir / "metrics_per_class.csv", c.work_dir / "metrics_confusion.csv"};
  for (const auto& row : rows)
    if (row.minutes == c.horizons_minutes.front())
      r.notes.push_back("evaluate " + row.model + " set" + std::to_string(row.set) + " " +
                        std::string(channel_name(row.ch)) + " h=" + std::to_string(row.minutes) +
                        "min: F1=" + format_double(row.m.f1));
  return r;
}

namespace {

// Slot j predicted from the last feature row by the (j+1)-bin model.
std::vector<std::uint8_t> horizon_slots(const RunConfig& c, const BinSeries& s, std::size_t row) {
  if (c.horizon_mode != "lead")
    fail(ErrorKind::InvalidConfig, "24-slot forecasts need horizon_mode = lead");
  const Channel ch = c.schedule_channel;
  const int set = c.feature_sets.front();
  const Family fam = c.families.front().family;
  const FeatureMatrix f = build_features(s, ch, set, FeatureOptions{c.set1_both_channels});
  const Matrix x = f.rows.slice_rows(row, row + 1);
  std::vector<std::uint8_t> slots;
  for (int j = 1; j <= kPatternSlots; ++j) {
    const std::int64_t seconds = j * s.bin_width;
    if (seconds % 60 != 0) fail(ErrorKind::InvalidConfig, "bin_width must be whole minutes for horizon models");
    const fs::path p = artifacts::model(c, fam, ch, set, static_cast<int>(seconds / 60));
    const TrainedModel m = load_checked_model(c, p);
    check_features(m, f.names, p);
    slots.push_back(predict(m, x).front() > 0);
  }
  return slots;
}

}  // namespace

CommandResult run_predict(const RunConfig& c, const std::optional<fs::path>& bins,
                          const std::optional<fs::path>& model) {
  LoadedBins lb = bins ? load_bin_series_csv(*bins, c.bin_width) : load_labeled(c);
  const BinSeries& s = lb.series;
  BurstPattern pat;
  pat.interval = static_cast<double>(s.bin_width);
  std::string mode;
  if (model || c.predict_mode == "sliding") {
    if (s.size() < static_cast<std::size_t>(kPatternSlots))
      fail(ErrorKind::PatternTooShort, "sliding prediction needs at least 24 bins");
    const fs::path p = model ? *model
                             : artifacts::model(c, c.families.front().family, c.schedule_channel,
                                                c.feature_sets.front(), c.horizons_minutes.front());
    const TrainedModel m = model ? load_model(p) : load_checked_model(c, p);
    const FeatureMatrix f =
        build_features(s, parse_channel(m.meta.channel), m.meta.feature_set, FeatureOptions{c.set1_both_channels});
    check_features(m, f.names, p);
    const auto pred = predict(m, f.rows.slice_rows(s.size() - kPatternSlots, s.size()));
    for (int v : pred) pat.slots.push_back(v > 0);
    mode = "sliding";
  } else {
    if (s.empty()) fail(ErrorKind::TooFewBins, "no bins to predict from");
    pat.slots = horizon_slots(c, s, s.size() - 1);
    mode = "horizon";
  }
  PatternSet one;
  one.patterns.push_back({pat, 1});
  one.total_windows = 1;
  write_patterns(one, artifacts::pattern(c), provenance_of(c));
  CommandResult r;
  r.written = {artifacts::pattern(c)};
  r.notes.push_back("predict (" + mode + "): " + pat.bits());
  return r;
}

CommandResult run_schedule(const RunConfig& c) {
  const auto path = artifacts::pattern(c);
  require(path, "predict");
  Provenance pp;
  const PatternSet set = read_patterns(path, &pp);
  check_hash(pp, c, path, "predict");
  if (set.patterns.size() != 1) fail(ErrorKind::InvalidPattern, path.string() + " must hold one pattern");
  BurstPattern pat = set.patterns.front().pattern;
  pat.interval = static_cast<double>(c.bin_width);
  std::ostringstream out;
  write_provenance(out, provenance_of(c));
  out << "strategy,alpha,job,start_index,delay,est_run_time,score\n";
  CommandResult r;
  for (const auto& s : c.strategies)
    for (const auto& j : c.jobs) {
      const ScheduleDecision d = schedule(pat, j, s.alpha, pat.interval, kPatternSlots);
      out << s.name << ',' << format_double(s.alpha) << ',' << j.name << ',' << d.start_index << ','
          << format_double(d.delay) << ',' << format_double(d.est_run_time) << ',' << format_double(d.score) << '\n';
      if (&j == &c.jobs.front())
        r.notes.push_back("schedule " + s.name + " " + j.name + ": start " + std::to_string(d.start_index) +
                          ", run " + format_double(d.est_run_time) + " s");
    }
  write_text_file(artifacts::schedule(c), out.str());
  r.written = {artifacts::schedule(c)};
  return r;
}

CommandResult run_simulate(const RunConfig& c) {
  const LoadedBins lb = load_labeled(c);
  const auto& labels = column(lb, label_column(c.schedule_channel));
  const double interval = static_cast<double>(c.bin_width);
  std::vector<PatternCase> cases;
  PatternSet realized_set;
  if (c.simulate_mode == "truth") {
    realized_set = extract_patterns(labels, kPatternSlots);
    cases = truth_cases(realized_set);
  } else {
    const std::size_t n = labels.size();
    if (n < 2 * static_cast<std::size_t>(kPatternSlots))
      fail(ErrorKind::PatternTooShort, "predicted-mode simulation needs at least 48 bins");
    const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * c.train_fraction));
    std::map<std::pair<std::string, std::string>, std::uint64_t> seen;
    std::map<std::string, std::uint64_t> realized;
    // Features at t forecast bins t+1 .. t+24.
    if (c.horizon_mode != "lead") fail(ErrorKind::InvalidConfig, "predicted-mode simulation needs horizon_mode = lead");
    const Channel ch = c.schedule_channel;
    const int set = c.feature_sets.front();
    const Family fam = c.families.front().family;
    const FeatureMatrix f = build_features(lb.series, ch, set, FeatureOptions{c.set1_both_channels});
    std::vector<std::vector<int>> by_horizon;
    for (int j = 1; j <= kPatternSlots; ++j) {
      const fs::path p = artifacts::model(c, fam, ch, set, static_cast<int>(j * c.bin_width / 60));
      const TrainedModel m = load_checked_model(c, p);
      check_features(m, f.names, p);
      by_horizon.push_back(predict(m, f.rows));
    }
    for (std::size_t t = start; t + kPatternSlots < n; ++t) {
      std::string truth(kPatternSlots, '0'), pred(kPatternSlots, '0');
      for (std::size_t j = 0; j < static_cast<std::size_t>(kPatternSlots); ++j) {
        if (labels[t + 1 + j] > 0) truth[j] = '1';
        if (by_horizon[j][t] > 0) pred[j] = '1';
      }
      if (truth.find('1') == std::string::npos) continue;
      ++seen[{pred, truth}];
      ++realized[truth];
    }
    for (const auto& [key, n_cases] : seen)
      cases.push_back({BurstPattern::from_bits(key.first), BurstPattern::from_bits(key.second), n_cases});
    for (const auto& [bits, n_w] : realized) {
      realized_set.patterns.push_back({BurstPattern::from_bits(bits), n_w});
      realized_set.total_windows += n_w;
    }
  }
  for (auto& cs : cases) cs.predicted.interval = cs.realized.interval = interval;
  const Provenance prov = provenance_of(c);
  write_patterns(realized_set, artifacts::patterns(c), prov);
  const BatchReport rep = batch_evaluate(cases, c.jobs, c.strategies, interval);
  write_text_file(artifacts::simulation(c), report_csv(rep, prov));
  write_text_file(c.work_dir / "cdf_delay.csv", cdf_csv(rep, OutcomeField::Delay, prov));
  write_text_file(c.work_dir / "cdf_run.csv", cdf_csv(rep, OutcomeField::Run, prov));
  write_text_file(c.work_dir / "cdf_total.csv", cdf_csv(rep, OutcomeField::Total, prov));
  CommandResult r;
  r.written = {artifacts::patterns(c), artifacts::simulation(c), c.work_dir / "cdf_delay.csv",
               c.work_dir / "cdf_run.csv", c.work_dir / "cdf_total.csv"};
  r.notes.push_back("simulate (" + c.simulate_mode + "): " + std::to_string(realized_set.patterns.size()) +
                    " unique patterns, " + std::to_string(realized_set.total_windows) + " windows");
  for (const auto& row : rep.rows)
    if (!c.jobs.empty() && row.job == c.jobs.front().name)
      r.notes.push_back("  " + row.strategy + " " + row.job + ": delay " + format_double(row.mean_delay) +
                        " run " + format_double(row.mean_run) + " total " + format_double(row.mean_total));
  return r;
}

CommandResult run_report(const RunConfig& c) {
  // Every upstream artifact must come from the same config and seed.
  check_csv(c, artifacts::bins(c), "ingest");
  check_csv(c, artifacts::ingest_report(c), "ingest");
  check_csv(c, artifacts::labels(c), "label");
  for (Channel ch : c.channels) {
    const auto p = artifacts::threshold(c, ch);
    require(p, "label");
    Provenance tp;
    parse_threshold_json(read_text_file(p), &tp);
    check_hash(tp, c, p, "label");
  }
  const fs::path an = artifacts::analysis_dir(c);
  check_csv(c, an / "stats.csv", "analyze");
  for (const auto& cell : cells(c))
    (void)load_checked_model(c, artifacts::model(c, c.families[cell.family_index].family, cell.channel,
                                                 cell.feature_set, cell.horizon_minutes));
  check_csv(c, artifacts::metrics(c), "evaluate");
  check_csv(c, artifacts::simulation(c), "simulate");
  check_csv(c, artifacts::patterns(c), "simulate");
  for (const char* f : {"cdf_delay.csv", "cdf_run.csv", "cdf_total.csv"}) check_csv(c, c.work_dir / f, "simulate");
  if (fs::exists(artifacts::pattern(c))) check_csv(c, artifacts::pattern(c), "predict");
  if (fs::exists(artifacts::schedule(c))) check_csv(c, artifacts::schedule(c), "schedule");
  if (fs::exists(artifacts::ground_truth(c))) check_csv(c, artifacts::ground_truth(c), "synth");

  const fs::path out = artifacts::report_dir(c);
  const Provenance prov = provenance_of(c);
  CommandResult r;
  auto copy = [&](const fs::path& from, const std::string& stage) {
    check_csv(c, from, stage);
    write_text_file(out / from.filename(), read_text_file(from));
    r.written.push_back(out / from.filename());
  };
  for (Channel ch : c.channels) {
    const std::string name(channel_name(ch));
    copy(an / ("deviation_" + name + ".csv"), "analyze");
    copy(an / ("run_lengths_" + name + ".csv"), "analyze");
    copy(an / ("hourly_" + name + ".csv"), "analyze");
    if (fs::exists(an / ("severity_" + name + ".csv"))) copy(an / ("severity_" + name + ".csv"), "analyze");

    const CsvTable hist = read_csv(an / ("deviation_" + name + ".csv"));
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : hist.rows)
      if (row[0] != "-inf" && row[1] != "inf") pts.emplace_back(parse_double(row[0]), parse_double(row[2]));
    write_text_file(out / ("deviation_" + name + ".svg"),
                    svg_line_chart(prov, name + " bytes: bins per 0.2 sigma group", "sigma from mean", "bins",
                                   {{name, pts}}));
  }
  copy(an / "stats.csv", "analyze");
  copy(artifacts::simulation(c), "simulate");
  for (const char* f : {"cdf_delay.csv", "cdf_run.csv", "cdf_total.csv"}) copy(c.work_dir / f, "simulate");

  // F1 against lead time, one line per (model, set, channel).
  const CsvTable m = read_csv(artifacts::metrics(c));
  const auto im = m.column("model"), is = m.column("feature_set"), ih = m.column("horizon_minutes"),
             ic = m.column("channel"), ifs = m.column("f1");
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  std::ostringstream f1;
  write_provenance(f1, prov);
  f1 << "model,feature_set,channel,horizon_minutes,f1\n";
  for (const auto& row : m.rows) {
    f1 << row[im] << ',' << row[is] << ',' << row[ic] << ',' << row[ih] << ',' << row[ifs] << '\n';
    curves[row[im] + " set" + row[is] + " " + row[ic]].emplace_back(parse_double(row[ih]), parse_double(row[ifs]));
  }
  write_text_file(out / "f1_vs_horizon.csv", f1.str());
  write_text_file(out / "f1_vs_horizon.svg",
                  svg_line_chart(prov, "F1 by lead time", "horizon (minutes)", "F1",
                                 {curves.begin(), curves.end()}));
  r.written.push_back(out / "f1_vs_horizon.csv");

  // Run time against leading burst slots per job.
  std::ostringstream ov;
  write_provenance(ov, prov);
  ov << "job,burst_slots,run_time,ratio_to_clean\n";
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> ov_lines;
  for (const auto& j : c.jobs) {
    const auto curve = overlap_curve(j, kPatternSlots, static_cast<double>(c.bin_width));
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      ov << j.name << ',' << k << ',' << format_double(curve[k]) << ',' << format_double(curve[k] / curve[0]) << '\n';
      pts.emplace_back(static_cast<double>(k), curve[k]);
    }
    ov_lines.emplace_back(j.name, std::move(pts));
  }
  write_text_file(out / "overlap_curve.csv", ov.str());
  write_text_file(out / "overlap_curve.svg",
                  svg_line_chart(prov, "Run time vs overlapping burst slots", "burst slots", "seconds", ov_lines));
  r.written.push_back(out / "overlap_curve.csv");

  const CsvTable cdf_run = read_csv(c.work_dir / "cdf_run.csv");
  std::map<std::string, std::vector<std::pair<double, double>>> cdf_lines;
  const auto cs = cdf_run.column("strategy"), cj = cdf_run.column("job"), cv = cdf_run.column("value"),
             cf = cdf_run.column("cumulative_fraction");
  for (const auto& row : cdf_run.rows)
    if (!c.jobs.empty() && row[cj] == c.jobs.front().name)
      cdf_lines[row[cs]].emplace_back(parse_double(row[cv]), parse_double(row[cf]));
  write_text_file(out / "cdf_run.svg",
                  svg_line_chart(prov, "Run time CDF (" + (c.jobs.empty() ? std::string() : c.jobs.front().name) + ")",
                                 "seconds", "fraction", {cdf_lines.begin(), cdf_lines.end()}));
  r.notes.push_back("report: " + std::to_string(r.written.size()) + " CSV files in " + out.string());
  return r;
}

CommandResult run_all(const RunConfig& c) {
  CommandResult all;
  auto add = [&](CommandResult r) {
    all.written.insert(all.written.end(), r.written.begin(), r.written.end());
    all.notes.insert(all.notes.end(), r.notes.begin(), r.notes.end());
  };
  if (c.logs_dir.empty()) add(run_synth(c));
  add(run_ingest(c));
  add(run_label(c));
  add(run_analyze(c));
  add(run_train(c));
  add(run_evaluate(c));
  add(run_predict(c));
  add(run_schedule(c));
  add(run_simulate(c));
  add(run_report(c));
  return all;
}

}  // namespace burstcast
