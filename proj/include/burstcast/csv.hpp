#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace burstcast {

// Provenance line written as the first line of every CSV artifact:
//   # config_hash=<hex> seed=<n>
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  bool present = false;
};

struct CsvTable {
  Provenance provenance;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column, throws ParseError if absent.
  std::size_t column(std::string_view name) const;
};

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

void write_provenance(std::ostream& out, const Provenance& p);
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temp file + rename so a crashed run never leaves half a file.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace burstcast
