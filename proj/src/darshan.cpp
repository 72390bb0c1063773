#include "burstcast/darshan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include "burstcast/csv.hpp"
#include "burstcast/error.hpp"

namespace burstcast {

std::string_view channel_name(Channel c) noexcept { return c == Channel::Read ? "read" : "write"; }

Channel parse_channel(std::string_view name) {
  if (name == "read") return Channel::Read;
  if (name == "write") return Channel::Write;
  fail(ErrorKind::InvalidConfig, "unknown channel '" + std::string(name) + "'");
}

namespace {

std::optional<CounterRecord> parse_record(std::string_view line) {
  const auto cols = split(line, '\t');
  if (cols.size() != 8) return std::nullopt;
  CounterRecord r;
  try {
    r.module = cols[0];
    r.rank = parse_int(cols[1]);
    r.record_id = parse_uint(cols[2]);
    r.counter = cols[3];
    r.value = parse_double(cols[4]);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (r.module.empty() || r.counter.empty() || !std::isfinite(r.value)) return std::nullopt;
  r.file_name = cols[5];
  r.mount_pt = cols[6];
  r.fs_type = cols[7];
  return r;
}

const std::string* find_header(const ParsedLog& log, std::string_view key) {
  for (const auto& [k, v] : log.headers)
    if (k == key) return &v;
  return nullptr;
}

std::int64_t header_int(const std::string& key, const std::string& value) {
  try {
    return parse_int(value);
  } catch (const Error&) {
    fail(ErrorKind::MalformedHeader, "header '" + key + "' is not an integer: '" + value + "'");
  }
}

void fill_meta(ParsedLog& log) {
  const std::string* start = find_header(log, "start_time");
  if (start == nullptr) fail(ErrorKind::MissingHeaderField, "no start_time header");
  JobMeta& m = log.meta;
  m.start_time = header_int("start_time", *start);
  if (auto* v = find_header(log, "uid")) m.uid = header_int("uid", *v);
  if (auto* v = find_header(log, "jobid")) m.job_id = header_int("jobid", *v);
  if (auto* v = find_header(log, "nprocs")) m.nprocs = header_int("nprocs", *v);
  const std::string* end = find_header(log, "end_time");
  const std::string* run = find_header(log, "run time");
  if (end != nullptr) m.end_time = header_int("end_time", *end);
  if (run != nullptr) m.run_time = header_int("run time", *run);
  if (end == nullptr) m.end_time = m.start_time + m.run_time;
  if (run == nullptr) m.run_time = m.end_time - m.start_time;
  if (m.end_time < m.start_time) fail(ErrorKind::MalformedHeader, "end_time precedes start_time");
  if (m.nprocs < 1) fail(ErrorKind::MalformedHeader, "nprocs < 1");
  if (m.run_time < 0) fail(ErrorKind::MalformedHeader, "negative run time");
}

}  // namespace

ParsedLog parse_log(std::istream& in) {
  ParsedLog log;
  std::string line;
  bool any_content = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view = line;
    if (trim(view).empty()) continue;
    any_content = true;
    if (view.front() == '#') {
      // "#<module>\t<rank>..." column legends and other comments carry no ':'
      // after a plain key; only "# key: value" lines are headers.
      std::string_view body = view.substr(1);
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      std::string_view key = trim(body.substr(0, colon));
      if (key.empty() || key.front() == '<') continue;
      log.headers.emplace_back(std::string(key), std::string(trim(body.substr(colon + 1))));
      continue;
    }
    if (auto rec = parse_record(view)) {
      log.records.push_back(std::move(*rec));
    } else {
      ++log.malformed_lines;
    }
  }
  if (!any_content) fail(ErrorKind::EmptyFile, "log has no content");
  fill_meta(log);
  return log;
}

ParsedLog parse_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_log(in);
}

std::string serialize_log(const ParsedLog& log) {
  std::ostringstream out;
  for (const auto& [k, v] : log.headers) out << "# " << k << ": " << v << '\n';
  out << "#<module>\t<rank>\t<record id>\t<counter>\t<value>\t<file name>\t<mount pt>\t<fs type>\n";
  for (const auto& r : log.records) {
    out << r.module << '\t' << r.rank << '\t' << r.record_id << '\t' << r.counter << '\t'
        << format_double(r.value) << '\t' << r.file_name << '\t' << r.mount_pt << '\t'
        << r.fs_type << '\n';
  }
  return out.str();
}

namespace {

struct Group {
  std::optional<double> bytes;
  std::optional<double> ops;
  std::optional<double> start;
  std::optional<double> end;
};

struct CounterRole {
  Channel channel;
  enum { Bytes, Ops, Start, End } field;
};

std::optional<CounterRole> classify(std::string_view counter) {
  if (counter == "POSIX_READS") return CounterRole{Channel::Read, CounterRole::Ops};
  if (counter == "POSIX_BYTES_READ") return CounterRole{Channel::Read, CounterRole::Bytes};
  if (counter == "POSIX_F_READ_START_TIMESTAMP") return CounterRole{Channel::Read, CounterRole::Start};
  if (counter == "POSIX_F_READ_END_TIMESTAMP") return CounterRole{Channel::Read, CounterRole::End};
  if (counter == "POSIX_WRITES") return CounterRole{Channel::Write, CounterRole::Ops};
  if (counter == "POSIX_BYTES_WRITTEN") return CounterRole{Channel::Write, CounterRole::Bytes};
  if (counter == "POSIX_F_WRITE_START_TIMESTAMP") return CounterRole{Channel::Write, CounterRole::Start};
  if (counter == "POSIX_F_WRITE_END_TIMESTAMP") return CounterRole{Channel::Write, CounterRole::End};
  return std::nullopt;
}

}  // namespace

ExtractResult extract_io_operations(const JobMeta& meta, const std::vector<CounterRecord>& records) {
  // Ordered map keeps the output independent of record order.
  using Key = std::tuple<std::int64_t, std::uint64_t, int>;
  std::map<Key, Group> groups;
  for (const auto& r : records) {
    if (r.module != "POSIX") continue;
    auto role = classify(r.counter);
    if (!role) continue;
    Group& g = groups[Key{r.rank, r.record_id, static_cast<int>(role->channel)}];
    switch (role->field) {
      case CounterRole::Bytes: g.bytes = r.value; break;
      case CounterRole::Ops: g.ops = r.value; break;
      case CounterRole::Start: g.start = r.value; break;
      case CounterRole::End: g.end = r.value; break;
    }
  }

  ExtractResult out;
  const double job_start = static_cast<double>(meta.start_time);
  const double job_limit = job_start + static_cast<double>(meta.run_time) + 1.0;
  for (const auto& [key, g] : groups) {
    if (!g.bytes) {
      ++out.dropped_missing_bytes;
      continue;
    }
    IoOperation op;
    op.channel = static_cast<Channel>(std::get<2>(key));
    op.bytes = *g.bytes;
    op.op_count = g.ops.value_or(0.0);
    if (op.bytes < 0.0 || op.op_count < 0.0) {
      ++out.anomalies;
      continue;
    }
    if (g.start && g.end) {
      if (*g.end < *g.start || *g.start < 0.0) {
        ++out.anomalies;
        continue;
      }
      op.start_abs = job_start + *g.start;
      op.end_abs = job_start + *g.end;
      if (op.end_abs > job_limit) {
        ++out.anomalies;
        continue;
      }
    } else {
      op.start_abs = job_start;
      op.end_abs = static_cast<double>(meta.end_time);
    }
    op.io_seconds = op.end_abs - op.start_abs;
    out.operations.push_back(op);
  }
  return out;
}

namespace {

struct FileOutcome {
  std::optional<JobEntry> job;
  IngestReportRow row;
};

FileOutcome ingest_file(const std::filesystem::path& path) {
  FileOutcome out;
  out.row.file = path.string();
  std::ifstream in(path);
  if (!in) {
    out.row.status = "skipped:IoError";
    return out;
  }
  try {
    ParsedLog log = parse_log(in);
    ExtractResult ex = extract_io_operations(log.meta, log.records);
    out.row.status = "ok";
    out.row.records = log.records.size();
    out.row.anomalies = ex.anomalies + ex.dropped_missing_bytes + log.malformed_lines;
    out.job = JobEntry{path, log.meta, std::move(ex.operations)};
  } catch (const Error& e) {
    out.row.status = "skipped:" + std::string(e.kind_name());
  }
  return out;
}

}  // namespace

ScanResult scan_directory(const std::filesystem::path& root, bool recursive, unsigned threads) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    fail(ErrorKind::MissingArtifact, "not a readable directory: " + root.string());

  std::vector<fs::path> files;
  auto collect = [&](const fs::directory_entry& e) {
    if (e.is_regular_file(ec)) files.push_back(e.path());
  };
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied))
      collect(e);
  } else {
    for (const auto& e : fs::directory_iterator(root, fs::directory_options::skip_permission_denied))
      collect(e);
  }
  std::sort(files.begin(), files.end());

  std::vector<FileOutcome> outcomes(files.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, files.size())));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < files.size(); i = next++) outcomes[i] = ingest_file(files[i]);
      });
    }
  }

  ScanResult result;
  for (auto& o : outcomes) {
    result.report.push_back(o.row);
    if (o.job) result.jobs.push_back(std::move(*o.job));
  }
  std::sort(result.jobs.begin(), result.jobs.end(), [](const JobEntry& a, const JobEntry& b) {
    return std::tie(a.meta.start_time, a.meta.job_id, a.path) <
           std::tie(b.meta.start_time, b.meta.job_id, b.path);
  });
  return result;
}

std::string ingest_report_csv(const std::vector<IngestReportRow>& rows) {
  std::ostringstream out;
  out << "file,status,records,anomalies\n";
  for (const auto& r : rows) out << r.file << ',' << r.status << ',' << r.records << ',' << r.anomalies << '\n';
  return out.str();
}

}  // namespace burstcast
