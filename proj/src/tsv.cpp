#include "passdrop/tsv.hpp"

#include "passdrop/errors.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace passdrop::tsv {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool next_row(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

void write_header(std::ostream& os, std::string_view kind, int version,
                  const std::vector<std::string_view>& columns) {
    os << "#passdrop-" << kind << " v" << version << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "\t" : "") << columns[i];
    os << '\n';
}

void expect_header(std::istream& is, std::string_view kind, int version,
                   const std::vector<std::string_view>& columns, std::string_view what) {
    std::string line;
    const auto magic = fmt::format("#passdrop-{} v{}", kind, version);
    if (!next_row(is, line) || line != magic)
        throw FormatError(fmt::format("{}: expected version line '{}', got '{}'", what, magic, line));
    if (!next_row(is, line))
        throw FormatError(fmt::format("{}: missing column header", what));
    auto got = split(line);
    if (got != columns)
        throw FormatError(fmt::format("{}: unexpected column header '{}'", what, line));
}

std::string_view field(std::string_view s) {
    if (s.find_first_of("\t\n\r") != std::string_view::npos)
        throw FormatError(fmt::format("field contains a tab or newline: '{}'", s));
    return s;
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError(fmt::format("{}: not a number: '{}'", what, s));
    return v;
}

long long parse_int(std::string_view s, std::string_view what) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError(fmt::format("{}: not an integer: '{}'", what, s));
    return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw FormatError(fmt::format("{}: not a boolean: '{}'", what, s));
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace passdrop::tsv
