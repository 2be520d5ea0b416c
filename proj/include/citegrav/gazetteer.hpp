#pragma once

#include <array>
#include <deque>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "citegrav/country.hpp"
#include "citegrav/csv.hpp"
#include "citegrav/error.hpp"
#include "citegrav/geo.hpp"
#include "citegrav/normalize.hpp"

namespace citegrav {

enum class TerritoryLevel { Country, Lau };

inline std::string_view to_string(TerritoryLevel level) {
    return level == TerritoryLevel::Country ? "country" : "lau";
}

// Geographic unit a publication can be attributed to. LAU entries carry the
// code of the country they belong to.
struct Territory {
    std::string id;
    TerritoryLevel level = TerritoryLevel::Lau;
    std::string name;
    std::string country_code;
    GeoPoint centroid;
};

// Immutable-after-load lookup structure over territories and capitals.
// City lookup is exact on normalized names; misses are data-quality events
// for the caller to count, not errors.
class Gazetteer {
  public:
    void add(Territory t) {
        if (t.id.empty()) throw DataError("territory with empty id");
        if (by_id_.contains(t.id)) throw DataError("duplicate territory id '" + t.id + "'");
        if (t.level == TerritoryLevel::Lau && t.country_code.empty())
            throw DataError("LAU territory '" + t.id + "' lacks a country code");
        entries_.push_back(std::move(t));
        const Territory& stored = entries_.back();
        by_id_.emplace(stored.id, &stored);
        if (stored.level == TerritoryLevel::Lau)
            by_city_.emplace(city_key(stored.name, stored.country_code), &stored);
    }

    void add_capital(std::string_view iso2, std::string_view name, GeoPoint p) {
        capitals_.insert_or_assign(std::string(iso2), Capital{std::string(name), p});
    }

    // Gazetteer CSV: id,level,name,country_code,lat,lon (header required).
    static Gazetteer from_csv(std::istream& in, const std::string& source) {
        Gazetteer g;
        g.load_territories_csv(in, source);
        return g;
    }

    void load_territories_csv(std::istream& in, const std::string& source) {
        static constexpr std::array<std::string_view, 6> kHeader = {"id",           "level",
                                                                    "name",         "country_code",
                                                                    "lat",          "lon"};
        read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
            Territory t;
            t.id = f[0];
            std::string level = normalize_name(f[1]);
            if (level == "lau")
                t.level = TerritoryLevel::Lau;
            else if (level == "country")
                t.level = TerritoryLevel::Country;
            else
                throw DataError(source + ":" + std::to_string(ln) + ": unknown level '" + f[1] +
                                "'");
            t.name = f[2];
            t.country_code = f[3];
            t.centroid = GeoPoint(parse_double_field(f[4], source, ln),
                                  parse_double_field(f[5], source, ln));
            add(std::move(t));
        });
    }

    // Capitals CSV: country_code,name,lat,lon (header required).
    void load_capitals_csv(std::istream& in, const std::string& source) {
        static constexpr std::array<std::string_view, 4> kHeader = {"country_code", "name", "lat",
                                                                    "lon"};
        read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
            add_capital(f[0], f[1],
                        GeoPoint(parse_double_field(f[2], source, ln),
                                 parse_double_field(f[3], source, ln)));
        });
    }

    const Territory* find_id(std::string_view id) const {
        auto it = by_id_.find(std::string(id));
        return it != by_id_.end() ? it->second : nullptr;
    }

    const Territory* find_city(std::string_view city, std::string_view iso2) const {
        auto it = by_city_.find(city_key(city, iso2));
        return it != by_city_.end() ? it->second : nullptr;
    }

    bool has_capital(const std::string& iso2) const { return capitals_.contains(iso2); }

    GeoPoint capital(const std::string& iso2) const {
        auto it = capitals_.find(iso2);
        if (it == capitals_.end()) throw DataError("unknown country code '" + iso2 + "'");
        return it->second.location;
    }

    std::size_t size() const { return entries_.size(); }
    const std::deque<Territory>& entries() const { return entries_; }

  private:
    struct Capital {
        std::string name;
        GeoPoint location;
    };

    static std::string city_key(std::string_view city, std::string_view iso2) {
        std::string key = normalize_name(city);
        key.push_back('\x1f');
        for (char c : iso2) key.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 32) : c);
        return key;
    }

    std::deque<Territory> entries_;  // deque: stable addresses for the indexes
    std::unordered_map<std::string, const Territory*> by_id_;
    std::unordered_map<std::string, const Territory*> by_city_;
    std::unordered_map<std::string, Capital> capitals_;
};

// Resolves a (city, country) expression to a LAU. The country part may be a
// name, an alias, or a bare alpha-2 code known to the alias table.
inline const Territory* lookup_territory(std::string_view city, std::string_view country,
                                         const Gazetteer& g, const CountryAliases& aliases) {
    auto code = aliases.resolve(country);
    if (!code) return nullptr;
    return g.find_city(city, *code);
}

// Capital centroid for a country code; throws DataError for unknown codes.
inline GeoPoint country_capital(const std::string& iso2, const Gazetteer& g) {
    return g.capital(iso2);
}

}  // namespace citegrav
