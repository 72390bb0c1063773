#include "burstcast/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "burstcast/error.hpp"
#include "burstcast/rng.hpp"

namespace burstcast {

std::int64_t SynthConfig::n_bins() const {
  return static_cast<std::int64_t>(std::ceil(duration / static_cast<double>(bin_width)));
}

void validate(const SynthConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, what); };
  if (!(cfg.duration > 0.0) || !std::isfinite(cfg.duration)) bad("duration must be > 0");
  if (cfg.bin_width <= 0) bad("bin_width must be > 0");
  if (!(cfg.job_arrival_rate >= 0.0) || !std::isfinite(cfg.job_arrival_rate)) bad("job_arrival_rate must be >= 0");
  if (!(cfg.op_size > 0.0)) bad("op_size must be > 0");
  if (cfg.ranks_per_job < 1) bad("ranks_per_job must be >= 1");
  for (const LogNormal* l : {&cfg.job_length, &cfg.read_baseline, &cfg.write_baseline})
    if (!std::isfinite(l->mu) || !(l->sigma >= 0.0)) bad("log-normal parameters must be finite with sigma >= 0");
  const std::int64_t n = cfg.n_bins();
  for (const auto& b : cfg.bursts) {
    if (!(b.magnitude > 1.0)) bad("burst magnitude must be > 1");
    if (b.length_bins < 1 || b.start_bin < 0) bad("burst needs start_bin >= 0 and length_bins >= 1");
    if (b.start_bin + b.length_bins > n)
      fail(ErrorKind::InfeasibleSchedule, "burst at bin " + std::to_string(b.start_bin) + " runs past the " +
                                              std::to_string(n) + "-bin duration");
  }
  if (cfg.periodic) {
    const auto& p = *cfg.periodic;
    if (p.period_bins < 1) bad("period_bins must be >= 1");
    if (!(p.magnitude > 1.0)) bad("periodic magnitude must be > 1");
    if (p.ramp && (p.ramp_bins < 1 || p.ramp_bins >= p.period_bins)) bad("ramp_bins must be in [1, period)");
    if (p.ramp && !(p.ramp_peak >= 1.0)) bad("ramp_peak must be >= 1");
    if (p.phase >= p.period_bins) bad("phase must be < period_bins");
    if ((p.phase < 0 ? p.period_bins - 1 : p.phase) >= n)
      fail(ErrorKind::InfeasibleSchedule, "periodic bursts start past the duration");
  }
}

namespace {

struct Job {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t id = 0;
};

std::string fixed6(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  return std::string(buf, r.ptr);
}

std::string asci(std::int64_t t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%a %b %d %H:%M:%S %Y", &tm);
  return buf;
}

void push_group(ParsedLog& log, std::int64_t rank, std::uint64_t rid, Channel c, double bytes, double ops,
                double rel_start, double rel_end) {
  const bool rd = c == Channel::Read;
  const std::string file = "/mnt/c/" + std::to_string(rid % 10000000000ull);
  auto rec = [&](const char* counter, double v) {
    log.records.push_back({"POSIX", rank, rid, counter, v, file, "/mnt/c", "lustre"});
  };
  rec(rd ? "POSIX_READS" : "POSIX_WRITES", ops);
  rec(rd ? "POSIX_BYTES_READ" : "POSIX_BYTES_WRITTEN", bytes);
  rec(rd ? "POSIX_F_READ_START_TIMESTAMP" : "POSIX_F_WRITE_START_TIMESTAMP", parse_double(fixed6(rel_start)));
  rec(rd ? "POSIX_F_READ_END_TIMESTAMP" : "POSIX_F_WRITE_END_TIMESTAMP", parse_double(fixed6(rel_end)));
}

}  // namespace

Corpus synthesize(const SynthConfig& cfg) {
  validate(cfg);
  const std::int64_t n = cfg.n_bins();
  const std::int64_t w = cfg.bin_width;
  const std::int64_t origin = cfg.origin();
  const auto nz = static_cast<std::size_t>(n);

  Corpus corpus;
  GroundTruth& gt = corpus.truth;
  gt.origin = origin;
  gt.bin_width = w;
  gt.read_burst.assign(nz, 0);
  gt.write_burst.assign(nz, 0);
  gt.read_bytes.assign(nz, 0.0);
  gt.write_bytes.assign(nz, 0.0);
  if (cfg.job_arrival_rate == 0.0) return corpus;

  std::vector<double> read_mult(nz, 1.0), write_mult(nz, 1.0);
  auto mult = [&](Channel c) -> std::vector<double>& { return c == Channel::Read ? read_mult : write_mult; };
  auto flags = [&](Channel c) -> std::vector<int>& { return c == Channel::Read ? gt.read_burst : gt.write_burst; };

  if (cfg.periodic) {
    const auto& p = *cfg.periodic;
    const std::int64_t phase = p.phase < 0 ? p.period_bins - 1 : p.phase;
    for (Channel c : p.channels)
      for (std::int64_t t = phase; t < n; t += p.period_bins) {
        mult(c)[static_cast<std::size_t>(t)] = p.magnitude;
        flags(c)[static_cast<std::size_t>(t)] = 1;
      }
    if (p.ramp)
      for (Channel c : p.channels)
        for (std::int64_t t = phase; t < n; t += p.period_bins)
          for (std::int64_t j = 1; j <= p.ramp_bins; ++j) {
            const std::int64_t b = t - p.ramp_bins + j - 1;
            if (b < 0 || flags(c)[static_cast<std::size_t>(b)]) continue;
            const double r = 1.0 + (p.ramp_peak - 1.0) * static_cast<double>(j) / static_cast<double>(p.ramp_bins);
            auto& m = mult(c)[static_cast<std::size_t>(b)];
            m = std::max(m, r);
          }
  }
  for (const auto& b : cfg.bursts)
    for (std::int64_t t = b.start_bin; t < b.start_bin + b.length_bins; ++t) {
      mult(b.channel)[static_cast<std::size_t>(t)] = b.magnitude;
      flags(b.channel)[static_cast<std::size_t>(t)] = 1;
    }

  Rng base(derive_seed(cfg.seed, 1));
  for (std::size_t b = 0; b < nz; ++b) {
    gt.read_bytes[b] = std::round(base.lognormal(cfg.read_baseline.mu, cfg.read_baseline.sigma) * read_mult[b]);
    gt.write_bytes[b] = std::round(base.lognormal(cfg.write_baseline.mu, cfg.write_baseline.sigma) * write_mult[b]);
  }

  // Poisson arrivals over the whole window, then a filler job for any bin
  // no job covers.
  std::vector<Job> jobs;
  Rng arrivals(derive_seed(cfg.seed, 2));
  const double rate = cfg.job_arrival_rate / 3600.0;
  for (double t = arrivals.exponential(rate); t < cfg.duration; t += arrivals.exponential(rate)) {
    const double len = std::clamp(arrivals.lognormal(cfg.job_length.mu, cfg.job_length.sigma), 60.0, 7.0 * 86400.0);
    const auto start = origin + static_cast<std::int64_t>(t);
    jobs.push_back({start, start + static_cast<std::int64_t>(std::ceil(len)), 0});
  }
  std::vector<char> covered(nz, 0);
  for (const auto& j : jobs) {
    const std::int64_t first = (j.start - origin) / w;
    const std::int64_t last = std::min(n - 1, (j.end - 1 - origin) / w);
    for (std::int64_t b = first; b <= last; ++b) covered[static_cast<std::size_t>(b)] = 1;
  }
  for (std::int64_t b = 0; b < n; ++b)
    if (!covered[static_cast<std::size_t>(b)]) {
      const std::int64_t bs = origin + b * w;
      jobs.push_back({bs + w / 10, bs + std::max<std::int64_t>(w / 10 + 1, (9 * w) / 10), 0});
    }
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].id = 7000000 + static_cast<std::int64_t>(i);

  std::vector<std::vector<std::size_t>> active(nz);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::int64_t first = (jobs[i].start - origin) / w;
    const std::int64_t last = std::min(n - 1, (jobs[i].end - 1 - origin) / w);
    for (std::int64_t b = first; b <= last; ++b) active[static_cast<std::size_t>(b)].push_back(i);
  }

  corpus.logs.resize(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& j = jobs[i];
    ParsedLog& log = corpus.logs[i];
    log.meta = {cfg.uid, j.id, j.start, j.end, cfg.ranks_per_job, j.end - j.start};
    log.headers = {{"uid", std::to_string(cfg.uid)},
                   {"jobid", std::to_string(j.id)},
                   {"start_time", std::to_string(j.start)},
                   {"start_time_asci", asci(j.start)},
                   {"end_time", std::to_string(j.end)},
                   {"end_time_asci", asci(j.end)},
                   {"nprocs", std::to_string(cfg.ranks_per_job)},
                   {"run time", std::to_string(j.end - j.start)}};
  }

  for (std::size_t b = 0; b < nz; ++b) {
    const auto& act = active[b];
    Rng r(derive_seed(cfg.seed, 1000 + b));
    std::vector<double> wr(act.size()), ww(act.size());
    double sr = 0.0, sw = 0.0;
    for (std::size_t k = 0; k < act.size(); ++k) {
      wr[k] = r.uniform(0.5, 1.5);
      ww[k] = r.uniform(0.5, 1.5);
      sr += wr[k];
      sw += ww[k];
    }
    const auto total_r = static_cast<std::int64_t>(gt.read_bytes[b]);
    const auto total_w = static_cast<std::int64_t>(gt.write_bytes[b]);
    std::int64_t left_r = total_r, left_w = total_w;
    const double bs = static_cast<double>(origin + static_cast<std::int64_t>(b) * w);
    for (std::size_t k = 0; k < act.size(); ++k) {
      const Job& j = jobs[act[k]];
      const bool last = k + 1 == act.size();
      const std::int64_t share_r = last ? left_r : static_cast<std::int64_t>(std::floor(total_r * wr[k] / sr));
      const std::int64_t share_w = last ? left_w : static_cast<std::int64_t>(std::floor(total_w * ww[k] / sw));
      left_r -= share_r;
      left_w -= share_w;
      const std::uint64_t rid = derive_seed(derive_seed(cfg.seed, 3 + static_cast<std::uint64_t>(j.id)), b) >> 1;
      const std::int64_t rank = static_cast<std::int64_t>(b) % cfg.ranks_per_job;
      const double js = static_cast<double>(j.start);
      const double lo = std::max(bs + 1.0, js);
      const double hi = std::max(lo, std::min(bs + 0.95 * static_cast<double>(w), static_cast<double>(j.end)));
      for (Channel c : {Channel::Read, Channel::Write}) {
        const std::int64_t share = c == Channel::Read ? share_r : share_w;
        const double u = r.uniform(), v = r.uniform();
        if (share <= 0) continue;
        const double start = lo + 0.5 * u * (hi - lo);
        const double end = start + v * (hi - start);
        const double ops = std::max(1.0, std::round(static_cast<double>(share) / cfg.op_size));
        push_group(corpus.logs[act[k]], rank, rid, c, static_cast<double>(share), ops, start - js, end - js);
      }
    }
  }
  return corpus;
}

std::string ground_truth_csv(const GroundTruth& gt, const Provenance& prov) {
  std::ostringstream out;
  write_provenance(out, prov);
  out << "bin_index,read_burst,write_burst\n";
  for (std::size_t i = 0; i < gt.read_burst.size(); ++i)
    out << i << ',' << gt.read_burst[i] << ',' << gt.write_burst[i] << '\n';
  return out.str();
}

GroundTruth load_ground_truth(const std::filesystem::path& path, std::int64_t bin_width) {
  const CsvTable t = read_csv(path);
  GroundTruth gt;
  gt.bin_width = bin_width;
  const auto r = t.column("read_burst");
  const auto wcol = t.column("write_burst");
  for (const auto& row : t.rows) {
    gt.read_burst.push_back(static_cast<int>(parse_int(row.at(r))));
    gt.write_burst.push_back(static_cast<int>(parse_int(row.at(wcol))));
  }
  return gt;
}

SynthResult generate(const SynthConfig& cfg, const std::filesystem::path& out_dir, const Provenance& prov) {
  Corpus corpus = synthesize(cfg);
  const auto logs = out_dir / "logs";
  std::error_code ec;
  std::filesystem::create_directories(logs, ec);
  if (ec || !std::filesystem::is_directory(logs))
    fail(ErrorKind::UnwritableDirectory, "cannot create " + logs.string());
  for (const auto& e : std::filesystem::directory_iterator(logs, ec)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("job_") && name.ends_with(".txt")) std::filesystem::remove(e.path());
  }
  SynthResult res;
  try {
    for (const auto& log : corpus.logs) {
      write_text_file(logs / ("job_" + std::to_string(log.meta.job_id) + ".txt"), serialize_log(log));
      ++res.file_count;
    }
    write_text_file(out_dir / "ground_truth.csv", ground_truth_csv(corpus.truth, prov));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IoError) fail(ErrorKind::UnwritableDirectory, e.what());
    throw;
  }
  res.truth = std::move(corpus.truth);
  return res;
}

SynthConfig plant_predictable_bursts(SynthConfig cfg, const PeriodicBursts& periodic) {
  cfg.periodic = periodic;
  return cfg;
}

}  // namespace burstcast
