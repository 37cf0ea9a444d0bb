#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hatelab::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// RFC-4180: comma separated, double-quoted fields may contain commas,
/// line breaks and doubled quotes. CRLF and LF line endings are accepted.
std::vector<Record> parse(std::string_view content);
std::vector<Record> read_file(const std::filesystem::path& path);

/// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace hatelab::csv
