#include "burstcast/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "burstcast/error.hpp"

namespace burstcast {

void validate(const JobProfile& job) {
  if (!std::isfinite(job.min_time) || !std::isfinite(job.max_time) || job.min_time <= 0.0 ||
      job.max_time < job.min_time)
    fail(ErrorKind::InvalidProfile, "job '" + job.name + "' needs 0 < min_time <= max_time");
}

std::vector<JobProfile> paper_jobs() {
  return {{"DLIO", 850.0, 5000.0}, {"App2", 1260.0, 3780.0}, {"App3", 1830.0, 3660.0}};
}

std::size_t BurstPattern::burst_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](std::uint8_t s) { return s != 0; }));
}

std::string BurstPattern::bits() const {
  std::string s;
  s.reserve(slots.size());
  for (auto v : slots) s += v ? '1' : '0';
  return s;
}

BurstPattern BurstPattern::from_bits(std::string_view bits, double interval) {
  BurstPattern p;
  p.interval = interval;
  for (char c : bits) {
    if (c != '0' && c != '1') fail(ErrorKind::InvalidPattern, "pattern characters must be 0 or 1");
    p.slots.push_back(c == '1');
  }
  return p;
}

namespace {

void check_interval(double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) fail(ErrorKind::InvalidPattern, "interval must be positive");
}

}  // namespace

std::int64_t slots_needed(const BurstPattern& p, const JobProfile& job, std::size_t start, double interval) {
  const auto a = static_cast<std::int64_t>(std::ceil(job.min_time / interval));
  const auto b = static_cast<std::int64_t>(std::ceil(job.max_time / interval));
  std::int64_t remaining = a * b;
  std::int64_t used = 0;
  while (remaining > 0) {
    remaining -= p.burst(start + static_cast<std::size_t>(used)) ? a : b;
    ++used;
  }
  return used;
}

ScheduleDecision schedule(const BurstPattern& pattern, const JobProfile& job, double alpha, double interval,
                          int horizon) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidAlpha, "alpha must lie in [0, 1]");
  validate(job);
  check_interval(interval);
  if (horizon < 1 || pattern.size() != static_cast<std::size_t>(horizon))
    fail(ErrorKind::InvalidPattern, "pattern has " + std::to_string(pattern.size()) + " slots, expected " +
                                        std::to_string(horizon));
  ScheduleDecision best;
  for (int i = 0; i < horizon; ++i) {
    const double delay = i * interval;
    const double run = static_cast<double>(slots_needed(pattern, job, static_cast<std::size_t>(i), interval)) * interval;
    const double score = alpha * delay + (1.0 - alpha) * run;
    if (i == 0 || score < best.score) best = {i, delay, run, score};
  }
  return best;
}

double simulate_execution(const BurstPattern& realized, const JobProfile& job, int start_index, double interval) {
  validate(job);
  check_interval(interval);
  if (start_index < 0) fail(ErrorKind::InvalidPattern, "start index must be >= 0");
  return static_cast<double>(slots_needed(realized, job, static_cast<std::size_t>(start_index), interval)) * interval;
}

std::vector<double> overlap_curve(const JobProfile& job, int horizon, double interval) {
  std::vector<double> out;
  for (int k = 0; k <= horizon; ++k) {
    BurstPattern p;
    p.interval = interval;
    p.slots.assign(static_cast<std::size_t>(horizon), 0);
    std::fill_n(p.slots.begin(), k, 1);
    // Slots past the horizon are clean here: only the leading k overlap.
    p.slots.resize(static_cast<std::size_t>(horizon) + 64, 0);
    out.push_back(simulate_execution(p, job, 0, interval));
  }
  return out;
}

PatternSet extract_patterns(std::span<const int> labels, int window) {
  if (window < 1 || labels.size() < static_cast<std::size_t>(window))
    fail(ErrorKind::PatternTooShort, "need at least " + std::to_string(window) + " labels");
  const auto w = static_cast<std::size_t>(window);
  std::map<std::string, std::uint64_t> counts;
  PatternSet set;
  std::size_t bursts = 0;
  for (std::size_t i = 0; i < w; ++i) bursts += labels[i] > 0;
  for (std::size_t start = 0;; ++start) {
    if (bursts > 0) {
      std::string bits(w, '0');
      for (std::size_t j = 0; j < w; ++j)
        if (labels[start + j] > 0) bits[j] = '1';
      ++counts[bits];
      ++set.total_windows;
    }
    if (start + w >= labels.size()) break;
    bursts -= labels[start] > 0;
    bursts += labels[start + w] > 0;
  }
  for (const auto& [bits, n] : counts) set.patterns.push_back({BurstPattern::from_bits(bits), n});
  return set;
}

void write_patterns(const PatternSet& set, const std::filesystem::path& path, const Provenance& prov) {
  std::ostringstream out;
  write_provenance(out, prov);
  for (const auto& pc : set.patterns) out << pc.pattern.bits() << ' ' << pc.count << '\n';
  write_text_file(path, out.str());
}

PatternSet read_patterns(const std::filesystem::path& path, Provenance* prov) {
  std::istringstream in(read_text_file(path));
  PatternSet set;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t(trim(line));
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (prov) {
        std::istringstream one(t + "\n");
        *prov = parse_csv(one).provenance;
      }
      continue;
    }
    const auto space = t.find_first_of(" \t");
    PatternCount pc;
    pc.pattern = BurstPattern::from_bits(t.substr(0, space));
    pc.count = space == std::string::npos ? 1 : parse_uint(trim(t.substr(space + 1)));
    set.total_windows += pc.count;
    set.patterns.push_back(std::move(pc));
  }
  return set;
}

std::vector<Strategy> default_strategies() {
  return {{"MDT", 1.0}, {"W1", 0.7}, {"W2", 0.6}, {"W3", 0.5}, {"W4", 0.4}, {"MRT", 0.0}};
}

std::vector<PatternCase> truth_cases(const PatternSet& set) {
  std::vector<PatternCase> out;
  out.reserve(set.patterns.size());
  for (const auto& pc : set.patterns) out.push_back({pc.pattern, pc.pattern, pc.count});
  return out;
}

BatchReport batch_evaluate(std::span<const PatternCase> cases, std::span<const JobProfile> jobs,
                           std::span<const Strategy> strategies, double interval) {
  BatchReport rep;
  for (const auto& s : strategies) {
    for (const auto& job : jobs) {
      StrategyJobResult r;
      r.strategy = s.name;
      r.alpha = s.alpha;
      r.job = job.name;
      double wsum = 0.0, d = 0.0, run = 0.0;
      for (const auto& c : cases) {
        const auto dec = schedule(c.predicted, job, s.alpha, interval, static_cast<int>(c.predicted.size()));
        const Outcome o{dec.delay, simulate_execution(c.realized, job, dec.start_index, interval)};
        r.outcomes.push_back(o);
        r.weights.push_back(c.count);
        const auto w = static_cast<double>(c.count);
        wsum += w;
        d += w * o.delay;
        run += w * o.run;
      }
      if (wsum > 0.0) {
        r.mean_delay = d / wsum;
        r.mean_run = run / wsum;
        r.mean_total = r.mean_delay + r.mean_run;
      }
      rep.rows.push_back(std::move(r));
    }
  }
  return rep;
}

BatchReport batch_evaluate(const PatternSet& set, std::span<const JobProfile> jobs,
                           std::span<const Strategy> strategies, double interval) {
  const auto cases = truth_cases(set);
  return batch_evaluate(cases, jobs, strategies, interval);
}

std::vector<CdfPoint> cdf(const StrategyJobResult& r, OutcomeField field) {
  std::map<double, double> mass;
  double total = 0.0;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const Outcome& o = r.outcomes[i];
    const double v = field == OutcomeField::Delay ? o.delay : field == OutcomeField::Run ? o.run : o.total();
    mass[v] += static_cast<double>(r.weights[i]);
    total += static_cast<double>(r.weights[i]);
  }
  std::vector<CdfPoint> out;
  double acc = 0.0;
  for (const auto& [v, m] : mass) {
    acc += m;
    out.push_back({v, acc / total});
  }
  if (!out.empty()) out.back().cumulative_fraction = 1.0;
  return out;
}

std::string report_csv(const BatchReport& r, const Provenance& prov) {
  std::ostringstream out;
  write_provenance(out, prov);
  out << "strategy,job,mean_delay,mean_run,mean_total\n";
  for (const auto& row : r.rows)
    out << row.strategy << ',' << row.job << ',' << format_double(row.mean_delay) << ','
        << format_double(row.mean_run) << ',' << format_double(row.mean_total) << '\n';
  return out.str();
}

std::string cdf_csv(const BatchReport& r, OutcomeField field, const Provenance& prov) {
  std::ostringstream out;
  write_provenance(out, prov);
  out << "strategy,job,value,cumulative_fraction\n";
  for (const auto& row : r.rows)
    for (const auto& p : cdf(row, field))
      out << row.strategy << ',' << row.job << ',' << format_double(p.value) << ','
          << format_double(p.cumulative_fraction) << '\n';
  return out.str();
}

}  // namespace burstcast
