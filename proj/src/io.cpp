// CSV/JSON emitters for paths, tables and check reports. All floats are
// written with 17 significant digits so a generic parser recovers the exact
// double.
#include "regulie/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "regulie/core.hpp"

namespace regulie {
namespace {

/// Minimal JSON string escaping for the identifier-ish strings we emit.
std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string check_report_json(const CheckReport& report) {
  std::ostringstream os;
  os << "{\"check\":" << json_quote(report.id)
     << ",\"group\":" << json_quote(report.group)
     << ",\"params\":" << json_quote(report.params)
     << ",\"residual\":" << format_double(report.residual)
     << ",\"tolerance\":" << format_double(report.tolerance)
     << ",\"pass\":" << (report.pass ? "true" : "false")
     << ",\"wall_ms\":" << format_double(report.wall_ms) << "}";
  return os.str();
}

Table path_table(const GroupPath& path) {
  Table t;
  t.columns.push_back("t");
  const int rows = path.owner ? path.owner->rows : 0;
  const int cols = path.owner ? path.owner->cols : 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      t.columns.push_back(cols == 1 ? "x" + std::to_string(r + 1)
                                    : "m" + std::to_string(r + 1) + "_" +
                                          std::to_string(c + 1));
  for (std::size_t i = 0; i < path.ts.size(); ++i) {
    std::vector<double> row;
    row.reserve(t.columns.size());
    row.push_back(path.ts[i]);
    const Mat& v = path.values[i];
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) row.push_back(v(r, c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string table_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw UsageError("table row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string table_json(const Table& table) {
  std::ostringstream os;
  os << "[";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.columns.size())
      throw UsageError("table row width does not match the header");
    os << (r ? ",\n " : "\n ") << "{";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      os << (i ? "," : "") << json_quote(table.columns[i]) << ":"
         << format_double(table.rows[r][i]);
    os << "}";
  }
  os << (table.rows.empty() ? "]" : "\n]");
  return os.str();
}

void emit_table(const Table& table, const std::string& format,
                const std::string& path) {
  std::string body;
  if (format == "csv") body = table_csv(table);
  else if (format == "json") body = table_json(table);
  else throw UsageError("unknown table format '" + format + "'; use csv or json");
  write_text_file(path, body);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed while reading '" + path + "'");
  return os.str();
}

}  // namespace regulie
