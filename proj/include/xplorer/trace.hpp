#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace xpl {

// Fixed column order of every trace file.
const std::vector<std::string>& trace_columns();

struct Trace {
  std::vector<std::string> columns = trace_columns();
  std::vector<std::vector<double>> rows;

  std::size_t index(std::string_view name) const;  // throws std::out_of_range
  double at(std::size_t row, std::string_view name) const { return rows[row][index(name)]; }
  std::vector<double> column(std::string_view name) const;
};

// Header plus one row per line, 9 significant digits, LF line endings.
void write_trace_csv(const Trace& trace, std::ostream& out);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv_file(const std::filesystem::path& path);

// Writes path.partial and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace xpl
