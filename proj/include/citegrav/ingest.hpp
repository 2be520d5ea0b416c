#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citegrav/country.hpp"
#include "citegrav/error.hpp"
#include "citegrav/records.hpp"

namespace citegrav {

struct ParsedAddress {
    std::string city;
    std::string country;       // display name from the alias table
    std::string country_code;  // ISO-3166-1 alpha-2
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_segments(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            std::string seg = trim(s.substr(start, i - start));
            if (!seg.empty()) out.push_back(std::move(seg));
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ' ' || s[i] == '\t') {
            if (i > start) out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

// Postal-code token shapes seen in WoS-style addresses: "I-40127",
// "D-52062" (letter prefix + dash + digits), bare digit runs of length >= 3
// ("137701", "00185"), and short uppercase alphanumeric blocks ("B15", "2TH",
// "V5Z", "1M9").
inline bool is_postal_token(std::string_view t) {
    if (t.empty()) return false;
    std::size_t dash = t.find('-');
    if (dash != std::string_view::npos && dash >= 1 && dash <= 3 && dash + 1 < t.size()) {
        bool ok = true;
        for (std::size_t i = 0; i < dash; ++i) ok = ok && (is_upper(t[i]) || is_lower(t[i]));
        for (std::size_t i = dash + 1; i < t.size(); ++i) ok = ok && is_digit(t[i]);
        if (ok) return true;
    }
    bool all_digits = true;
    for (char c : t) all_digits = all_digits && is_digit(c);
    if (all_digits) return t.size() >= 3;
    if (t.size() <= 8) {
        bool has_digit = false, clean = true;
        for (char c : t) {
            has_digit = has_digit || is_digit(c);
            clean = clean && (is_digit(c) || is_upper(c));
        }
        if (has_digit && clean) return true;
    }
    return false;
}

// Two-letter uppercase region codes: US states, Canadian provinces ("NJ",
// "BC", "PQ").
inline bool is_region_code_token(std::string_view t) {
    return t.size() == 2 && is_upper(t[0]) && is_upper(t[1]);
}

// Extracts a city name from one address segment by dropping postal and
// region-code tokens. Empty result means the segment held nothing but
// qualifiers.
inline std::string city_from_segment(std::string_view segment, bool strip_region_codes) {
    std::string city;
    for (const std::string& tok : split_tokens(segment)) {
        if (is_postal_token(tok)) continue;
        if (strip_region_codes && is_region_code_token(tok)) continue;
        if (!city.empty()) city.push_back(' ');
        city += tok;
    }
    return city;
}

inline bool segment_has_postal(std::string_view segment) {
    for (const std::string& tok : split_tokens(segment))
        if (is_postal_token(tok)) return true;
    return false;
}

}  // namespace detail

// Reduces one affiliation line to a (city, country) expression.
//
// These rules are heuristics reverse-engineered from WoS-style address lines;
// they are deliberately conservative and fail soft (nullopt) when the final
// segment is not a recognizable country:
//   1. The country is the last comma-separated segment, resolved through the
//      alias table. A last segment ending in "USA" (e.g. "NJ USA",
//      "NY 10032 USA") resolves to the United States.
//   2. The city is taken from the segment nearest the country that carries a
//      postal code, with the postal tokens stripped ("I-40127 Bologna" ->
//      "Bologna", "Birmingham B15 2TH" -> "Birmingham").
//   3. Failing that, segments are scanned backwards from the country;
//      segments reducing to nothing but postal/region-code tokens
//      ("BC V5Z 1M9", "PQ") are skipped, and the first segment with a
//      residual name is the city.
inline std::optional<ParsedAddress> parse_address(std::string_view raw,
                                                  const CountryAliases& aliases) {
    std::vector<std::string> segments = detail::split_segments(raw);
    if (segments.size() < 2) return std::nullopt;

    const std::string& last = segments.back();
    std::optional<std::string> code = aliases.resolve(last);
    if (!code) {
        std::vector<std::string> toks = detail::split_tokens(last);
        if (!toks.empty() && normalize_name(toks.back()) == "usa") code = aliases.resolve("USA");
        if (!code) return std::nullopt;
    }

    std::size_t n = segments.size() - 1;  // candidate city segments: [0, n)
    std::string city;
    for (std::size_t i = n; i-- > 0;) {
        if (!detail::segment_has_postal(segments[i])) continue;
        city = detail::city_from_segment(segments[i], /*strip_region_codes=*/true);
        if (!city.empty()) break;
    }
    if (city.empty()) {
        for (std::size_t i = n; i-- > 0;) {
            city = detail::city_from_segment(segments[i], /*strip_region_codes=*/true);
            if (!city.empty()) break;
        }
    }
    if (city.empty()) return std::nullopt;
    return ParsedAddress{city, aliases.canonical_name(*code), *code};
}

template <typename Record>
struct LoadResult {
    std::vector<Record> records;
    IngestStats stats;
};

namespace detail {

inline bool get_string(const nlohmann::json& j, const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

inline bool get_int(const nlohmann::json& j, const char* key, int& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) return false;
    out = it->get<int>();
    return true;
}

inline bool get_string_array(const nlohmann::json& j, const char* key,
                             std::vector<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return false;
    out.clear();
    for (const auto& v : *it) {
        if (!v.is_string()) return false;
        out.push_back(v.get<std::string>());
    }
    return true;
}

}  // namespace detail

// Cited JSONL: {"pub_id", "year", "affiliations": [str],
//               "authors": [{"key", "affil_idx": [int]}]}.
// Malformed lines are counted and skipped, never fatal; an unreadable stream
// is the caller's I/O error to surface.
inline LoadResult<CitedRecord> load_cited(std::istream& in, const std::string& source) {
    LoadResult<CitedRecord> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++result.stats.lines_total;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            result.stats.skip(source, line_no, "not a JSON object");
            continue;
        }
        CitedRecord rec;
        if (!detail::get_string(j, "pub_id", rec.pub_id) || rec.pub_id.empty()) {
            result.stats.skip(source, line_no, "missing pub_id");
            continue;
        }
        if (!detail::get_int(j, "year", rec.year)) {
            result.stats.skip(source, line_no, "missing year");
            continue;
        }
        if (!detail::get_string_array(j, "affiliations", rec.affiliations)) {
            result.stats.skip(source, line_no, "missing affiliations");
            continue;
        }
        auto authors_it = j.find("authors");
        bool ok = authors_it != j.end() && authors_it->is_array();
        if (ok) {
            for (const auto& a : *authors_it) {
                AuthorLink link;
                if (!a.is_object() || !detail::get_string(a, "key", link.key)) {
                    ok = false;
                    break;
                }
                auto idx_it = a.find("affil_idx");
                if (idx_it == a.end() || !idx_it->is_array() || idx_it->empty()) {
                    ok = false;
                    break;
                }
                for (const auto& v : *idx_it) {
                    if (!v.is_number_integer() || v.get<long long>() < 0 ||
                        v.get<std::size_t>() >= rec.affiliations.size()) {
                        ok = false;
                        break;
                    }
                    link.affil_idx.push_back(v.get<std::size_t>());
                }
                if (!ok) break;
                rec.authors.push_back(std::move(link));
            }
        }
        if (!ok) {
            result.stats.skip(source, line_no, "bad authors/affil_idx");
            continue;
        }
        ++result.stats.records_loaded;
        result.records.push_back(std::move(rec));
    }
    return result;
}

// Citing JSONL: {"pub_id", "year", "addresses": [str], "cites": [str]}.
// An empty address list is legal (the record is just unassignable); an empty
// cites list is a schema violation.
inline LoadResult<CitingRecord> load_citing(std::istream& in, const std::string& source) {
    LoadResult<CitingRecord> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++result.stats.lines_total;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            result.stats.skip(source, line_no, "not a JSON object");
            continue;
        }
        CitingRecord rec;
        if (!detail::get_string(j, "pub_id", rec.pub_id) || rec.pub_id.empty()) {
            result.stats.skip(source, line_no, "missing pub_id");
            continue;
        }
        if (!detail::get_int(j, "year", rec.year)) {
            result.stats.skip(source, line_no, "missing year");
            continue;
        }
        if (!detail::get_string_array(j, "addresses", rec.addresses)) {
            result.stats.skip(source, line_no, "missing addresses");
            continue;
        }
        if (!detail::get_string_array(j, "cites", rec.cites) || rec.cites.empty()) {
            result.stats.skip(source, line_no, "missing or empty cites");
            continue;
        }
        ++result.stats.records_loaded;
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace citegrav
