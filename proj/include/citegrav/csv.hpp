#pragma once

#include <charconv>
#include <cstddef>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "citegrav/error.hpp"

namespace citegrav {

// Splits one CSV line. Fields may be double-quoted; embedded quotes are
// escaped by doubling. Records never span lines in our formats.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double_field(std::string_view s, const std::string& source,
                                 std::size_t line_no) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(source + ":" + std::to_string(line_no) + ": not a number: '" +
                        std::string(s) + "'");
    return v;
}

inline long long parse_int_field(std::string_view s, const std::string& source,
                                 std::size_t line_no) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(source + ":" + std::to_string(line_no) + ": not an integer: '" +
                        std::string(s) + "'");
    return v;
}

// Reads a header-checked CSV stream. The first line must match the expected
// header exactly (UTF-8 BOM and trailing CR tolerated); every data row must
// have the same column count. Blank lines are skipped.
inline void read_csv(std::istream& in, const std::string& source,
                     std::span<const std::string_view> header,
                     const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": empty file, expected a header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expected;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) expected.push_back(',');
        expected += header[i];
    }
    if (line != expected)
        throw DataError(source + ": bad header '" + line + "', expected '" + expected + "'");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        row(fields, line_no);
    }
}

}  // namespace citegrav
