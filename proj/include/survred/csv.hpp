#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace survred {

// Minimal strict CSV: comma separated, UTF-8, header row required.
// Double-quoted fields with "" escapes are accepted on input.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  size_t nrow() const { return rows.size(); }
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

// Numeric formatting used by all exporters: 12 significant digits.
std::string format_number(double x);

// Strict double parse; returns false on trailing garbage or empty input.
bool parse_number(const std::string& s, double& out);

std::string csv_quote(const std::string& field);

}  // namespace survred
