#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace passdrop::tsv {

std::vector<std::string_view> split(std::string_view line, char sep = '\t');

// Reads the "#passdrop-<kind> v<version>" line and then the column header.
// Throws FormatError naming `what` when either does not match.
void expect_header(std::istream& is, std::string_view kind, int version,
                   const std::vector<std::string_view>& columns, std::string_view what);

void write_header(std::ostream& os, std::string_view kind, int version,
                  const std::vector<std::string_view>& columns);

// Next non-empty line without trailing '\r'. Returns false at EOF.
bool next_row(std::istream& is, std::string& line);

// Rejects tabs and newlines inside a field.
std::string_view field(std::string_view s);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

} // namespace passdrop::tsv
