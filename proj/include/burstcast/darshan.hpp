#pragma once

// Reader for the text form of Darshan job logs (darshan-parser output):
// "# key: value" header lines followed by 8-column tab-separated counter
// records. Only POSIX counters feed I/O accounting.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace burstcast {

enum class Channel { Read, Write };

std::string_view channel_name(Channel c) noexcept;
Channel parse_channel(std::string_view name);

struct JobMeta {
  std::int64_t uid = 0;
  std::int64_t job_id = 0;
  std::int64_t start_time = 0;  // epoch seconds
  std::int64_t end_time = 0;    // epoch seconds
  std::int64_t nprocs = 1;
  std::int64_t run_time = 0;  // seconds

  bool operator==(const JobMeta&) const = default;
};

struct CounterRecord {
  std::string module;
  std::int64_t rank = 0;
  std::uint64_t record_id = 0;
  std::string counter;
  double value = 0.0;
  std::string file_name;
  std::string mount_pt;
  std::string fs_type;

  bool operator==(const CounterRecord&) const = default;
};

struct ParsedLog {
  JobMeta meta;
  // Every "# key: value" header pair in file order, raw text preserved.
  std::vector<std::pair<std::string, std::string>> headers;
  std::vector<CounterRecord> records;
  std::size_t malformed_lines = 0;

  bool operator==(const ParsedLog&) const = default;
};

struct IoOperation {
  Channel channel = Channel::Read;
  double bytes = 0.0;
  double op_count = 0.0;
  double start_abs = 0.0;  // epoch seconds, fractional
  double end_abs = 0.0;
  double io_seconds = 0.0;  // end_abs − start_abs

  bool operator==(const IoOperation&) const = default;
};

struct ExtractResult {
  std::vector<IoOperation> operations;
  std::size_t dropped_missing_bytes = 0;
  std::size_t anomalies = 0;  // negative or out-of-job intervals, dropped
};

// Throws EmptyFile, MissingHeaderField (no start_time) or MalformedHeader.
ParsedLog parse_log(std::istream& in);
ParsedLog parse_log(std::string_view text);

// Inverse of parse_log for the captured structure (headers + records).
std::string serialize_log(const ParsedLog& log);

ExtractResult extract_io_operations(const JobMeta& meta, const std::vector<CounterRecord>& records);

struct JobEntry {
  std::filesystem::path path;
  JobMeta meta;
  std::vector<IoOperation> operations;
};

struct IngestReportRow {
  std::string file;
  std::string status;  // "ok" or "skipped:<ErrorKind>"
  std::size_t records = 0;
  std::size_t anomalies = 0;
};

struct ScanResult {
  std::vector<JobEntry> jobs;            // sorted by (start_time, job_id, path)
  std::vector<IngestReportRow> report;   // sorted by file
};

// Parses every regular file below `root`; files are processed on
// `threads` workers (0 = hardware concurrency).
ScanResult scan_directory(const std::filesystem::path& root, bool recursive,
                          unsigned threads = 0);

// CSV: file,status,records,anomalies
std::string ingest_report_csv(const std::vector<IngestReportRow>& rows);

}  // namespace burstcast
