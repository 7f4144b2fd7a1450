#include "xplorer/trace.hpp"

#include "xplorer/math.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xpl {

namespace {

std::vector<std::string> build_columns() {
  std::vector<std::string> c;
  auto add = [&c](std::initializer_list<const char*> names) {
    for (const char* n : names) c.emplace_back(n);
  };
  auto indexed = [&c](const std::string& stem, std::initializer_list<const char*> suffixes) {
    for (const char* s : suffixes) c.push_back(stem + s);
  };
  add({"t", "x", "y", "z", "vx", "vy", "vz"});
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) c.push_back("r" + std::to_string(r) + std::to_string(k));
  }
  add({"wx", "wy", "wz"});
  indexed("th", {"1", "2", "3", "4"});
  indexed("thd", {"1", "2", "3", "4"});
  add({"thrust", "taux", "tauy", "tauz", "mode"});
  add({"rd_x", "rd_y", "rd_z", "psi_d", "rds_x", "rds_y", "rds_z", "psi_ds"});
  add({"est_tick"});
  indexed("raw_th", {"1", "2", "3", "4"});
  add({"acc_x", "acc_y", "acc_z", "thrust_cmd", "taum_x", "taum_y", "taum_z"});
  indexed("thf", {"1", "2", "3", "4"});
  for (int i = 1; i <= 4; ++i) indexed("fa" + std::to_string(i), {"_x", "_y", "_z"});
  indexed("com", {"_x", "_y", "_z"});
  indexed("fused", {"_x", "_y", "_z"});
  indexed("body", {"_x", "_y", "_z"});
  indexed("kappa", {"_x", "_y", "_z"});
  add({"upsilon", "yaw_tau"});
  add({"ext_fx", "ext_fy", "ext_fz", "ext_tz", "contacts", "impact"});
  add({"gamma", "cn", "lambda", "psi_sp", "turn_accum", "sf_x", "sf_y", "yaw_rate_f", "blocks",
       "loop_closed"});
  return c;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    const auto j = line.find(',', i);
    out.push_back(line.substr(i, j == std::string::npos ? std::string::npos : j - i));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = build_columns();
  return cols;
}

std::size_t Trace::index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no trace column '" + std::string(name) + "'");
}

std::vector<double> Trace::column(std::string_view name) const {
  const std::size_t k = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  for (std::size_t i = 0; i < trace.columns.size(); ++i) {
    out << (i ? "," : "") << trace.columns[i];
  }
  out << '\n';
  std::string line;
  for (const auto& row : trace.rows) {
    if (row.size() != trace.columns.size()) throw std::logic_error("trace row width mismatch");
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += format_sig(row[i]);
    }
    line += '\n';
    out << line;
  }
}

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty");
  trace.columns = split_commas(line);
  long ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != trace.columns.size()) {
      throw std::runtime_error("trace line " + std::to_string(ln) + ": expected " +
                               std::to_string(trace.columns.size()) + " cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

Trace read_trace_csv_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace_csv(f);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto partial = path;
  partial += ".partial";
  {
    std::ofstream f(partial, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + partial.string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

}  // namespace xpl
