#include "clt/csv.hpp"

#include <charconv>
#include <cmath>

#include "clt/error.hpp"

namespace clt {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable& CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw LengthMismatch("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

ParsedCsv parse_csv(std::string_view text) {
  ParsedCsv out;
  bool first = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      out.header = std::move(cells);
      first = false;
    } else {
      out.rows.push_back(std::move(cells));
    }
  }
  return out;
}

}  // namespace clt
