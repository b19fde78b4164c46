#pragma once

#include <string>
#include <vector>

namespace foflux {

// Minimal CSV table: a header row plus numeric-or-text cells, comma separated,
// no quoting (none of our columns need it).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index for a header name; throws DataError naming the column if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// strtod with full-token validation; throws DataError with the given context
// on trailing garbage, empty cells or non-finite values.
double parse_cell(const std::string& cell, const std::string& context);

// 17 significant digits: round-trips any double exactly.
std::string format_full(double v);

}  // namespace foflux
