#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stocksent {

// Minimal RFC-4180 CSV support: quoted fields, embedded commas/quotes,
// both LF and CRLF line endings. Values are parsed without any locale.

struct CsvRow {
    long line = 0;  // 1-based line number of the row start, for error messages
    std::vector<std::string> fields;
};

std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);

}  // namespace stocksent
