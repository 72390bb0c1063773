#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "burstcast/csv.hpp"
#include "burstcast/darshan.hpp"
#include "burstcast/error.hpp"
#include "support.hpp"

using namespace burstcast;
using testsupport::kind_of;

namespace {

std::string job_text(std::int64_t jobid, std::int64_t start, const std::string& body) {
  std::ostringstream o;
  o << "# uid: 1\n# jobid: " << jobid << "\n# start_time: " << start << "\n# end_time: " << start + 1000
    << "\n# nprocs: 4\n# run time: 1000\n"
    << body;
  return o.str();
}

std::string rec(const std::string& counter, const std::string& value, int rank = 0, const std::string& id = "11",
                const std::string& module = "POSIX") {
  return module + "\t" + std::to_string(rank) + "\t" + id + "\t" + counter + "\t" + value + "\t/f\t/mnt\tlustre\n";
}

}  // namespace

TEST_CASE("Listing 1 header and records") {
  const ParsedLog log = parse_log(testsupport::kListing1);
  CHECK(log.meta == JobMeta{336263, 7738588, 1509271803, 1509355904, 48, 84102});
  REQUIRE(log.records.size() == 4);
  CHECK(log.malformed_lines == 0);
  const CounterRecord& r = log.records[1];
  CHECK(r.module == "POSIX");
  CHECK(r.rank == 0);
  CHECK(r.record_id == 129625958266154176ull);
  CHECK(r.counter == "POSIX_BYTES_READ");
  CHECK(r.value == 5924503.0);
  CHECK(r.file_name == "/mnt/c/1218605708");
  CHECK(r.mount_pt == "/mnt/c");
  CHECK(r.fs_type == "lustre");
  CHECK(log.headers.size() == 8);
  CHECK(log.headers[3].first == "start_time_asci");
  CHECK(log.headers[3].second == "Sun Oct 29 03:10:03 2017");
}

TEST_CASE("Listing 1 yields one read operation") {
  const ParsedLog log = parse_log(testsupport::kListing1);
  const ExtractResult ex = extract_io_operations(log.meta, log.records);
  REQUIRE(ex.operations.size() == 1);
  const IoOperation& op = ex.operations[0];
  CHECK(op.channel == Channel::Read);
  CHECK(op.bytes == 5924503.0);
  CHECK(op.op_count == 8409.0);
  CHECK(op.start_abs == 1509271803.0 + 15924.384187);
  CHECK(op.end_abs == 1509271803.0 + 77689.803174);
  CHECK(op.io_seconds == op.end_abs - op.start_abs);
  CHECK(ex.anomalies == 0);
}

TEST_CASE("write counters mirror the read side") {
  const std::string body = rec("POSIX_WRITES", "10") + rec("POSIX_BYTES_WRITTEN", "4096") +
                           rec("POSIX_F_WRITE_START_TIMESTAMP", "5.5") + rec("POSIX_F_WRITE_END_TIMESTAMP", "7.25");
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  const auto ex = extract_io_operations(log.meta, log.records);
  REQUIRE(ex.operations.size() == 1);
  CHECK(ex.operations[0] == IoOperation{Channel::Write, 4096, 10, 1005.5, 1007.25, 1.75});
}

TEST_CASE("groups without timestamps span the whole job") {
  const ParsedLog log = parse_log(job_text(1, 1000, rec("POSIX_BYTES_READ", "100")));
  const auto ex = extract_io_operations(log.meta, log.records);
  REQUIRE(ex.operations.size() == 1);
  CHECK(ex.operations[0].start_abs == 1000.0);
  CHECK(ex.operations[0].end_abs == 2000.0);
  CHECK(ex.operations[0].op_count == 0.0);
}

TEST_CASE("groups without bytes are dropped and counted") {
  const ParsedLog log = parse_log(job_text(1, 1000, rec("POSIX_READS", "3") + rec("POSIX_F_READ_START_TIMESTAMP", "1")));
  const auto ex = extract_io_operations(log.meta, log.records);
  CHECK(ex.operations.empty());
  CHECK(ex.dropped_missing_bytes == 1);
}

TEST_CASE("negative intervals are anomalies") {
  const std::string body = rec("POSIX_BYTES_READ", "100") + rec("POSIX_F_READ_START_TIMESTAMP", "50") +
                           rec("POSIX_F_READ_END_TIMESTAMP", "10");
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  const auto ex = extract_io_operations(log.meta, log.records);
  CHECK(ex.operations.empty());
  CHECK(ex.anomalies == 1);
}

TEST_CASE("intervals past the job end plus one second are anomalies") {
  auto run = [](const std::string& end) {
    const std::string body = rec("POSIX_BYTES_READ", "100") + rec("POSIX_F_READ_START_TIMESTAMP", "0") +
                             rec("POSIX_F_READ_END_TIMESTAMP", end);
    const ParsedLog log = parse_log(job_text(1, 1000, body));
    return extract_io_operations(log.meta, log.records);
  };
  CHECK(run("1000.9").operations.size() == 1);
  CHECK(run("1001.5").anomalies == 1);
}

TEST_CASE("non-POSIX modules are ignored") {
  const std::string body = rec("POSIX_BYTES_READ", "100") + rec("LUSTRE_BYTES_READ", "5", 0, "11", "LUSTRE") +
                           rec("POSIX_BYTES_READ", "7", 0, "12", "LUSTRE");
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  CHECK(log.records.size() == 3);
  const auto ex = extract_io_operations(log.meta, log.records);
  REQUIRE(ex.operations.size() == 1);
  CHECK(ex.operations[0].bytes == 100.0);
}

TEST_CASE("groups are keyed by rank, record and channel") {
  const std::string body = rec("POSIX_BYTES_READ", "1", 0, "5") + rec("POSIX_BYTES_READ", "2", 1, "5") +
                           rec("POSIX_BYTES_READ", "3", 0, "6") + rec("POSIX_BYTES_WRITTEN", "4", 0, "5");
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  CHECK(extract_io_operations(log.meta, log.records).operations.size() == 4);
}

TEST_CASE("malformed lines are counted and skipped") {
  const std::string body = rec("POSIX_BYTES_READ", "100") + "POSIX\t0\t11\tPOSIX_READS\n" +
                           rec("POSIX_READS", "abc") + rec("POSIX_READS", "inf") + "garbage line\n";
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  CHECK(log.records.size() == 1);
  CHECK(log.malformed_lines == 4);
}

TEST_CASE("header-only file parses to an empty record list") {
  const ParsedLog log = parse_log(job_text(3, 5000, ""));
  CHECK(log.records.empty());
  CHECK(log.meta.job_id == 3);
}

TEST_CASE("rejected files") {
  CHECK(kind_of([] { parse_log(std::string_view("")); }) == ErrorKind::EmptyFile);
  CHECK(kind_of([] { parse_log(std::string_view("\n\n  \n")); }) == ErrorKind::EmptyFile);
  CHECK(kind_of([] { parse_log(std::string_view("# uid: 1\n# jobid: 2\n")); }) == ErrorKind::MissingHeaderField);
}

TEST_CASE("serialize then parse is the identity") {
  const ParsedLog a = parse_log(testsupport::kListing1);
  const ParsedLog b = parse_log(serialize_log(a));
  CHECK(a == b);
  const ParsedLog c = parse_log(serialize_log(b));
  CHECK(b == c);
}

TEST_CASE("record order does not change the operation multiset") {
  std::string body;
  for (int g = 0; g < 20; ++g) {
    const std::string id = std::to_string(100 + g);
    body += rec("POSIX_READS", std::to_string(g + 1), g % 3, id) +
            rec("POSIX_BYTES_READ", std::to_string(1000 * g), g % 3, id) +
            rec("POSIX_F_READ_START_TIMESTAMP", std::to_string(g), g % 3, id) +
            rec("POSIX_F_READ_END_TIMESTAMP", std::to_string(g + 10), g % 3, id) +
            rec("POSIX_BYTES_WRITTEN", std::to_string(7 * g), g % 3, id);
  }
  const ParsedLog log = parse_log(job_text(1, 1000, body));
  const auto base = extract_io_operations(log.meta, log.records).operations;
  std::mt19937 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = log.records;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(extract_io_operations(log.meta, shuffled).operations == base);
  }
}

TEST_CASE("every operation starts inside the job window") {
  const ParsedLog log = parse_log(testsupport::kListing1);
  for (const auto& op : extract_io_operations(log.meta, log.records).operations) {
    CHECK(op.start_abs >= static_cast<double>(log.meta.start_time));
    CHECK(op.end_abs <= static_cast<double>(log.meta.start_time + log.meta.run_time) + 1.0);
  }
}

TEST_CASE("scan_directory orders by start time then job id") {
  const auto dir = testsupport::scratch("scan_order");
  write_text_file(dir / "a.txt", job_text(30, 3000, rec("POSIX_BYTES_READ", "1")));
  write_text_file(dir / "b.txt", job_text(20, 1000, rec("POSIX_BYTES_READ", "1")));
  write_text_file(dir / "sub" / "c.txt", job_text(10, 3000, rec("POSIX_BYTES_READ", "1")));
  for (unsigned threads : {1u, 4u}) {
    const ScanResult r = scan_directory(dir, true, threads);
    REQUIRE(r.jobs.size() == 3);
    CHECK(r.jobs[0].meta.job_id == 20);
    CHECK(r.jobs[1].meta.job_id == 10);
    CHECK(r.jobs[2].meta.job_id == 30);
    CHECK(r.report.size() == 3);
  }
  CHECK(scan_directory(dir, false).jobs.size() == 2);
}

TEST_CASE("scan_directory on an empty directory") {
  const auto dir = testsupport::scratch("scan_empty");
  const ScanResult r = scan_directory(dir, true);
  CHECK(r.jobs.empty());
  CHECK(r.report.empty());
  CHECK(ingest_report_csv(r.report) == "file,status,records,anomalies\n");
}

TEST_CASE("corrupt files are skipped and named in the report") {
  const auto dir = testsupport::scratch("scan_corrupt");
  write_text_file(dir / "good.txt", job_text(1, 1000, rec("POSIX_BYTES_READ", "1")));
  write_text_file(dir / "bad.txt", std::string("\x01\x02 not a log\n\xff\xfe"));
  write_text_file(dir / "empty.txt", "");
  const ScanResult r = scan_directory(dir, true);
  REQUIRE(r.jobs.size() == 1);
  REQUIRE(r.report.size() == 3);
  CHECK(r.report[0].file.ends_with("bad.txt"));
  CHECK(r.report[0].status == "skipped:MissingHeaderField");
  CHECK(r.report[1].status == "skipped:EmptyFile");
  CHECK(r.report[2].status == "ok");
  CHECK(r.report[2].records == 1);
}

TEST_CASE("scan_directory on a missing path") {
  CHECK(kind_of([] { scan_directory("/nonexistent/burstcast", true); }) == ErrorKind::MissingArtifact);
}
