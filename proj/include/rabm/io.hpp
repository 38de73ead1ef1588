#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rabm {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double value, int digits);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);

/// Splits one CSV line on commas. Fields may be double-quoted ("" escapes a quote).
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a CSV file into rows. The first line is the header; blank lines are skipped and
/// every row must have as many fields as the header. Rows keep their 1-based line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

CsvTable read_csv(std::istream& in, std::string_view source);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Column lookup; throws ParseError naming the file when missing.
std::size_t column_index(const CsvTable& table, std::string_view name, std::string_view source);

std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace rabm
