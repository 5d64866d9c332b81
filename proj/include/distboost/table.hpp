#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace distboost {

/// Column names plus string cells; written as comma-separated text with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws std::out_of_range if absent.
  std::size_t column_index(const std::string& name) const;
};

/// Shortest round-trippable decimal form.
std::string format_number(double v);

void write_csv(const Table& table, std::ostream& out);
void write_csv(const Table& table, const std::filesystem::path& path);

/// Reads a header-first CSV. Quoting is not supported; fields may not contain commas.
Table read_csv(std::istream& in);
Table read_csv(const std::filesystem::path& path);

/// Parses every cell of a column as a double; throws std::invalid_argument naming the row.
std::vector<double> numeric_column(const Table& table, std::size_t column);

}  // namespace distboost
