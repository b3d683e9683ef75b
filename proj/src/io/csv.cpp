#include "drs/io/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <system_error>

#include "drs/error.hpp"

namespace drs::io {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::SchemaMismatch, "missing column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const noexcept {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

namespace {

// Splits one record starting at `pos`; advances past its line terminator.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
      ++pos;
    } else if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
      ++pos;
    } else if (c == '\n') {
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted)
    throw Error(ErrorCode::ParseError, "unterminated quoted field starting on line " + std::to_string(start_line));
  fields.push_back(std::move(field));
  return fields;
}

bool blank(const std::vector<std::string>& record) {
  return record.size() == 1 && record[0].find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line = 1;
  while (pos < text.size() && table.header.empty()) {
    auto rec = next_record(text, pos, line);
    if (!blank(rec)) table.header = std::move(rec);
  }
  if (table.header.empty()) throw Error(ErrorCode::ParseError, "empty CSV (no header row)");
  while (pos < text.size()) {
    const std::size_t row_line = line;
    auto rec = next_record(text, pos, line);
    if (blank(rec)) continue;
    if (rec.size() != table.header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(row_line) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, got " +
                                             std::to_string(rec.size()));
    table.rows.push_back(std::move(rec));
    table.line_numbers.push_back(row_line);
  }
  return table;
}

std::string csv_line(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out += f;
      continue;
    }
    out.push_back('"');
    for (char c : f) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  }
  out.push_back('\n');
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) invariant_failure("to_chars failed");
  return std::string(buf.data(), end);
}

namespace {

std::string where(std::size_t line, std::string_view column) {
  return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::ParseError, where(line, column) + ": not a number: '" + std::string(field) + "'");
  return v;
}

long long parse_integer(std::string_view field, std::size_t line, std::string_view column) {
  field = trim(field);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::ParseError, where(line, column) + ": not an integer: '" + std::string(field) + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for '" + path.string() + "'");
  return data;
}

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path) {
  std::string data = read_file(path);
  return {data.begin(), data.end()};
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into '" + path.string() + "'");
  }
}

}  // namespace drs::io
