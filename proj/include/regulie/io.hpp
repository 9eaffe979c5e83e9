#pragma once

#include <string>
#include <vector>

#include "regulie/checks.hpp"
#include "regulie/curves.hpp"

namespace regulie {

/// Decimal form with 17 significant digits: enough to reproduce any double
/// exactly through a generic parser.
std::string format_double(double x);

/// One CheckReport as a single-line JSON object with keys check, group,
/// params, residual, tolerance, pass, wall_ms.
std::string check_report_json(const CheckReport& report);

/// A plain numeric table: named columns over rows of doubles.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// A sampled group path as a table: column t followed by the row-major
/// entries of the storage value (m<r>_<c> for matrix-shaped storage, x<i>
/// for column-vector storage).
Table path_table(const GroupPath& path);

/// CSV with a header row; RFC-style commas, one row per line.
std::string table_csv(const Table& table);

/// JSON array of objects keyed by the column names.
std::string table_json(const Table& table);

/// Writes the table to `path` as "csv" or "json" (UsageError for any other
/// format name); throws IoError when the file cannot be written.
void emit_table(const Table& table, const std::string& format,
                const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace regulie
