#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racetune {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_field(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

/// RFC 4180-style reader. The first record is the header; every row must
/// have as many fields as the header.
CsvTable read_csv(std::istream& in);
CsvTable load_csv(const std::string& path);

}  // namespace racetune
