#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drs::io {

/// Parsed CSV with a mandatory header row. Quoted fields ("a,b", "" escapes)
/// are supported; blank lines are skipped; CRLF is accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column index by name. Errors: SchemaMismatch naming the column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const noexcept;
};

/// Errors: ParseError (empty input, unterminated quote, ragged row with its line).
CsvTable parse_csv(std::string_view text);

/// Fields quoted only when they contain a comma, quote or newline.
std::string csv_line(std::span<const std::string> fields);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);
/// Full-field decimal parse. Errors: ParseError with the line and column.
double parse_number(std::string_view field, std::size_t line, std::string_view column);
long long parse_integer(std::string_view field, std::size_t line, std::string_view column);

/// Errors: IoError.
std::string read_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);
/// Writes through a sibling temporary and renames, so a failed run leaves no
/// partial file behind. Creates missing parent directories. Errors: IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace drs::io
