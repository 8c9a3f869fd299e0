#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clt {

// Shortest decimal form that parses back to exactly `v`.
std::string format_double(double v);

// Comma-separated, header row, '.' decimal point, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal CSV reader for the dialect above (no quoting). Used by tests and
// tooling that consume exported tables.
struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
ParsedCsv parse_csv(std::string_view text);

}  // namespace clt
