#pragma once

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "citegrav/csv.hpp"
#include "citegrav/error.hpp"
#include "citegrav/normalize.hpp"

namespace citegrav {

// Country name resolution table. Maps free-form country expressions
// ("England", "Peoples R China", "ITALY") to ISO-3166-1 alpha-2 codes.
// The first alias registered for a code doubles as its display name, so
// alias files conventionally lead with the canonical name.
class CountryAliases {
  public:
    void add(std::string_view alias, std::string_view iso2) {
        std::string code = validate_code(iso2);
        std::string key = normalize_name(alias);
        if (key.empty()) throw DataError("empty country alias for code " + code);
        alias_to_code_.emplace(key, code);
        display_.emplace(code, std::string(alias));
    }

    static CountryAliases from_csv(std::istream& in, const std::string& source) {
        CountryAliases table;
        static constexpr std::array<std::string_view, 2> kHeader = {"alias", "iso2"};
        read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t) {
            table.add(f[0], f[1]);
        });
        return table;
    }

    // Accepts an alias or a bare alpha-2 code (codes must be known).
    std::optional<std::string> resolve(std::string_view name_or_code) const {
        std::string key = normalize_name(name_or_code);
        if (auto it = alias_to_code_.find(key); it != alias_to_code_.end()) return it->second;
        if (key.size() == 2 && is_alpha(key[0]) && is_alpha(key[1])) {
            std::string code{static_cast<char>(key[0] - 'a' + 'A'),
                             static_cast<char>(key[1] - 'a' + 'A')};
            if (display_.contains(code)) return code;
        }
        return std::nullopt;
    }

    // Display name for a code; the code itself if we never saw an alias.
    std::string canonical_name(const std::string& iso2) const {
        auto it = display_.find(iso2);
        return it != display_.end() ? it->second : iso2;
    }

    bool known_code(const std::string& iso2) const { return display_.contains(iso2); }
    std::size_t size() const { return alias_to_code_.size(); }

  private:
    static bool is_alpha(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    }
    static std::string validate_code(std::string_view iso2) {
        if (iso2.size() != 2 || !is_alpha(iso2[0]) || !is_alpha(iso2[1]))
            throw DataError("bad ISO-3166-1 alpha-2 code: '" + std::string(iso2) + "'");
        std::string code(iso2);
        for (char& c : code)
            if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        return code;
    }

    std::unordered_map<std::string, std::string> alias_to_code_;
    std::unordered_map<std::string, std::string> display_;  // code -> first alias seen
};

}  // namespace citegrav
