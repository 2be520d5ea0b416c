#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "citegrav/csv.hpp"
#include "citegrav/error.hpp"
#include "citegrav/gazetteer.hpp"
#include "citegrav/ingest.hpp"
#include "citegrav/records.hpp"

namespace citegrav {

// Exact rational weight. Attribution is an argmax over sums of unit
// fractions; doing that in floating point would turn exact ties (which must
// yield "unassigned") into coin flips on rounding noise.
class Fraction {
  public:
    constexpr Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Fraction& operator+=(const Fraction& o) {
        __int128 n = static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_;
        __int128 d = static_cast<__int128>(den_) * o.den_;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("fraction overflow");
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(d);
        return *this;
    }

    friend Fraction operator+(Fraction a, const Fraction& b) { return a += b; }

    // Exact division by a positive integer (share = weight / author count).
    Fraction over(std::int64_t divisor) const {
        if (divisor <= 0) throw std::invalid_argument("nonpositive divisor");
        return Fraction(num_, den_ * divisor);
    }

    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator<(const Fraction& a, const Fraction& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Fraction& a, const Fraction& b) { return b < a; }

    // Nearest rational with the given denominator; for rehydrating decimal
    // CSV fields where only the displayed value matters.
    static Fraction approx(double v, std::int64_t den = 1000000000) {
        return Fraction(static_cast<std::int64_t>(v * static_cast<double>(den) + 0.5), den);
    }

  private:
    void normalize() {
        if (den_ == 0) throw std::invalid_argument("zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

enum class AttributionBasis { AuthorFractional, AddressFrequency };

inline std::string_view to_string(AttributionBasis b) {
    return b == AttributionBasis::AuthorFractional ? "author_fractional" : "address_frequency";
}

// Why a publication did or did not receive a territory. Tie and NoLocations
// are inherent to the counting rules; WinnerUnmatched covers a prevalent
// location the gazetteer cannot place (e.g. a foreign city at LAU level).
// Unassigned is the collapsed state after a CSV round trip, where the reason
// lives in the drop ledger instead.
enum class AttributionOutcome { Assigned, Tie, NoLocations, WinnerUnmatched, Unassigned };

inline std::string_view to_string(AttributionOutcome o) {
    switch (o) {
        case AttributionOutcome::Assigned: return "assigned";
        case AttributionOutcome::Tie: return "tie";
        case AttributionOutcome::NoLocations: return "no parseable locations";
        case AttributionOutcome::WinnerUnmatched: return "prevalent location not in gazetteer";
        case AttributionOutcome::Unassigned: return "unassigned";
    }
    return "unassigned";
}

struct Attribution {
    std::string pub_id;
    AttributionBasis basis = AttributionBasis::AuthorFractional;
    AttributionOutcome outcome = AttributionOutcome::NoLocations;
    TerritoryLevel level = TerritoryLevel::Lau;
    const Territory* territory = nullptr;  // resolved LAU; null for country-level rows
    std::string territory_id;              // LAU id or ISO code; empty when unassigned
    std::string country_code;              // country of the prevalent location when known
    Fraction share;                        // winner weight / denominator; 0 when unassigned

    bool assigned() const { return outcome == AttributionOutcome::Assigned; }
};

struct LocationWeight {
    const Territory* territory = nullptr;  // null when the city is not in the gazetteer
    std::string city;                      // normalized; kept for diagnostics
    std::string country_code;
    Fraction weight;
};

struct CitedWeights {
    std::vector<LocationWeight> locations;  // sorted by internal key, deterministic
    std::size_t counted_authors = 0;        // authors with >= 1 parseable affiliation
};

namespace detail {

inline std::string location_key(const Territory* t, const ParsedAddress& a) {
    if (t) return "t:" + t->id;
    return "u:" + normalize_name(a.city) + "|" + a.country_code;
}

}  // namespace detail

// Per-location author weights for the cited-side convention. Each counted
// author carries total weight 1, split equally over their distinct
// affiliation locations; the sum of all weights equals counted_authors
// exactly. Locations unify by gazetteer id when matched, by normalized
// (city, country) otherwise, so repeated mentions of one place collapse.
inline CitedWeights cited_location_weights(const CitedRecord& rec, const Gazetteer& g,
                                           const CountryAliases& aliases,
                                           IngestStats* stats = nullptr) {
    CitedWeights out;
    std::map<std::string, LocationWeight> acc;
    std::vector<std::optional<ParsedAddress>> parsed(rec.affiliations.size());
    std::vector<bool> seen(rec.affiliations.size(), false);
    for (const AuthorLink& author : rec.authors) {
        std::map<std::string, LocationWeight> here;
        for (std::size_t idx : author.affil_idx) {
            if (idx >= rec.affiliations.size()) continue;
            if (!seen[idx]) {
                seen[idx] = true;
                parsed[idx] = parse_address(rec.affiliations[idx], aliases);
                if (stats) {
                    ++stats->addresses_total;
                    if (parsed[idx]) ++stats->addresses_parsed;
                }
            }
            if (!parsed[idx]) continue;
            const ParsedAddress& a = *parsed[idx];
            const Territory* t = g.find_city(a.city, a.country_code);
            here.emplace(detail::location_key(t, a),
                         LocationWeight{t, normalize_name(a.city), a.country_code, Fraction()});
        }
        if (here.empty()) continue;
        ++out.counted_authors;
        Fraction split(1, static_cast<std::int64_t>(here.size()));
        for (auto& [key, loc] : here) {
            auto [it, inserted] = acc.emplace(key, loc);
            it->second.weight += split;
        }
    }
    out.locations.reserve(acc.size());
    for (auto& [key, loc] : acc) out.locations.push_back(std::move(loc));
    return out;
}

namespace detail {

// Argmax with exact tie detection: returns the index of the strict maximum,
// or nullopt when two or more candidates share it.
template <typename T, typename Less>
std::optional<std::size_t> strict_argmax(const std::vector<T>& items, Less less) {
    if (items.empty()) return std::nullopt;
    std::size_t best = 0;
    bool tied = false;
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (less(items[best], items[i])) {
            best = i;
            tied = false;
        } else if (!less(items[i], items[best])) {
            tied = true;
        }
    }
    if (tied) return std::nullopt;
    return best;
}

}  // namespace detail

// Cited-side convention: the territory hosting the greatest fractional share
// of authorships. The argmax runs over every location, foreign and
// unmatched ones included, so they deflate the winner's share exactly as in
// the worked byline. Share denominator is the number of counted authors.
inline Attribution prevalent_territory_cited(const CitedRecord& rec, const Gazetteer& g,
                                             const CountryAliases& aliases,
                                             IngestStats* stats = nullptr) {
    Attribution out;
    out.pub_id = rec.pub_id;
    out.basis = AttributionBasis::AuthorFractional;
    out.level = TerritoryLevel::Lau;
    CitedWeights w = cited_location_weights(rec, g, aliases, stats);
    if (w.locations.empty()) {
        out.outcome = AttributionOutcome::NoLocations;
        return out;
    }
    auto best = detail::strict_argmax(
        w.locations, [](const LocationWeight& a, const LocationWeight& b) {
            return a.weight < b.weight;
        });
    if (!best) {
        out.outcome = AttributionOutcome::Tie;
        return out;
    }
    const LocationWeight& win = w.locations[*best];
    out.country_code = win.country_code;
    out.share = win.weight.over(static_cast<std::int64_t>(w.counted_authors));
    if (!win.territory) {
        out.outcome = AttributionOutcome::WinnerUnmatched;
        return out;
    }
    out.outcome = AttributionOutcome::Assigned;
    out.territory = win.territory;
    out.territory_id = win.territory->id;
    return out;
}

// Cited-side convention aggregated to countries: location weights summed per
// country before the argmax (a Bologna/Rome split is still one full Italian
// authorship). Used for the convention-agreement rate.
inline Attribution prevalent_country_cited(const CitedRecord& rec, const CountryAliases& aliases,
                                           const Gazetteer* g = nullptr) {
    static const Gazetteer kEmpty;
    Attribution out;
    out.pub_id = rec.pub_id;
    out.basis = AttributionBasis::AuthorFractional;
    out.level = TerritoryLevel::Country;
    CitedWeights w = cited_location_weights(rec, g ? *g : kEmpty, aliases);
    if (w.locations.empty()) {
        out.outcome = AttributionOutcome::NoLocations;
        return out;
    }
    std::map<std::string, Fraction> by_country;
    for (const LocationWeight& loc : w.locations) by_country[loc.country_code] += loc.weight;
    std::vector<std::pair<std::string, Fraction>> items(by_country.begin(), by_country.end());
    auto best = detail::strict_argmax(items, [](const auto& a, const auto& b) {
        return a.second < b.second;
    });
    if (!best) {
        out.outcome = AttributionOutcome::Tie;
        return out;
    }
    out.outcome = AttributionOutcome::Assigned;
    out.territory_id = items[*best].first;
    out.country_code = items[*best].first;
    out.share = items[*best].second.over(static_cast<std::int64_t>(w.counted_authors));
    return out;
}

// Citing-side convention: most frequent country over the full address list.
// Full counting is deliberate; footnote-style duplicate addresses count
// every time they appear. Share denominator is the parseable address count.
inline Attribution prevalent_country_citing(const CitingRecord& rec,
                                            const CountryAliases& aliases,
                                            IngestStats* stats = nullptr) {
    Attribution out;
    out.pub_id = rec.pub_id;
    out.basis = AttributionBasis::AddressFrequency;
    out.level = TerritoryLevel::Country;
    std::map<std::string, std::int64_t> freq;
    std::int64_t parseable = 0;
    for (const std::string& addr : rec.addresses) {
        auto parsed = parse_address(addr, aliases);
        if (stats) {
            ++stats->addresses_total;
            if (parsed) ++stats->addresses_parsed;
        }
        if (!parsed) continue;
        ++parseable;
        ++freq[parsed->country_code];
    }
    if (parseable == 0) {
        out.outcome = AttributionOutcome::NoLocations;
        return out;
    }
    std::vector<std::pair<std::string, std::int64_t>> items(freq.begin(), freq.end());
    auto best = detail::strict_argmax(items, [](const auto& a, const auto& b) {
        return a.second < b.second;
    });
    if (!best) {
        out.outcome = AttributionOutcome::Tie;
        return out;
    }
    out.outcome = AttributionOutcome::Assigned;
    out.territory_id = items[*best].first;
    out.country_code = items[*best].first;
    out.share = Fraction(items[*best].second, parseable);
    return out;
}

// LAU refinement of the citing-side convention: most frequent city among the
// home-country addresses only. Callers should have established that the
// prevalent country equals `home`; the function itself only requires that
// home-country addresses exist.
inline Attribution prevalent_lau_citing(const CitingRecord& rec, const std::string& home,
                                        const Gazetteer& g, const CountryAliases& aliases) {
    Attribution out;
    out.pub_id = rec.pub_id;
    out.basis = AttributionBasis::AddressFrequency;
    out.level = TerritoryLevel::Lau;
    struct CityCount {
        const Territory* territory;
        std::string country_code;
        std::int64_t count;
    };
    std::map<std::string, CityCount> freq;
    std::int64_t home_addresses = 0;
    for (const std::string& addr : rec.addresses) {
        auto parsed = parse_address(addr, aliases);
        if (!parsed || parsed->country_code != home) continue;
        ++home_addresses;
        const Territory* t = g.find_city(parsed->city, parsed->country_code);
        auto [it, inserted] = freq.emplace(detail::location_key(t, *parsed),
                                           CityCount{t, parsed->country_code, 0});
        ++it->second.count;
    }
    if (home_addresses == 0) {
        out.outcome = AttributionOutcome::NoLocations;
        return out;
    }
    std::vector<CityCount> items;
    items.reserve(freq.size());
    for (auto& [key, c] : freq) items.push_back(c);
    auto best = detail::strict_argmax(items, [](const CityCount& a, const CityCount& b) {
        return a.count < b.count;
    });
    if (!best) {
        out.outcome = AttributionOutcome::Tie;
        return out;
    }
    const CityCount& win = items[*best];
    out.country_code = win.country_code;
    out.share = Fraction(win.count, home_addresses);
    if (!win.territory) {
        out.outcome = AttributionOutcome::WinnerUnmatched;
        return out;
    }
    out.outcome = AttributionOutcome::Assigned;
    out.territory = win.territory;
    out.territory_id = win.territory->id;
    return out;
}

struct PublicationViews {
    const CitedRecord* cited = nullptr;
    const CitingRecord* citing = nullptr;
};

// Fraction of publications where the author-fractional and address-frequency
// conventions name the same country. Both-unassigned counts as agreement;
// one-sided assignment does not.
inline double convention_agreement(const std::vector<PublicationViews>& recs,
                                   const CountryAliases& aliases,
                                   const Gazetteer* g = nullptr) {
    if (recs.empty()) throw DataError("convention agreement: empty sample");
    std::size_t agree = 0;
    for (const PublicationViews& v : recs) {
        if (!v.cited || !v.citing) throw DataError("convention agreement: incomplete record");
        Attribution a = prevalent_country_cited(*v.cited, aliases, g);
        Attribution b = prevalent_country_citing(*v.citing, aliases);
        bool same = a.assigned() && b.assigned() ? a.territory_id == b.territory_id
                                                 : !a.assigned() && !b.assigned();
        if (same) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(recs.size());
}

// Attribution CSV: pub_id,level,territory_id,share,basis. Unassigned rows
// keep empty territory_id and share; the reasons travel in the drop ledger.
inline void write_attributions_csv(std::ostream& out, const std::vector<Attribution>& attrs) {
    out << "pub_id,level,territory_id,share,basis\n";
    for (const Attribution& a : attrs) {
        out << csv_field(a.pub_id) << ',' << to_string(a.level) << ','
            << csv_field(a.territory_id) << ',';
        if (a.assigned()) out << format_double(a.share.value());
        out << ',' << to_string(a.basis) << '\n';
    }
}

// Round trip of write_attributions_csv. LAU territory ids are re-resolved
// against the gazetteer; a missing id is a data error naming the territory.
// Unassigned rows come back with the collapsed Unassigned outcome.
inline std::vector<Attribution> read_attributions_csv(std::istream& in, const std::string& source,
                                                      const Gazetteer& g) {
    std::vector<Attribution> out;
    static constexpr std::array<std::string_view, 5> kHeader = {"pub_id", "level", "territory_id",
                                                                "share", "basis"};
    read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
        Attribution a;
        a.pub_id = f[0];
        std::string level = normalize_name(f[1]);
        if (level == "lau")
            a.level = TerritoryLevel::Lau;
        else if (level == "country")
            a.level = TerritoryLevel::Country;
        else
            throw DataError(source + ":" + std::to_string(ln) + ": unknown level '" + f[1] + "'");
        a.basis = normalize_name(f[4]) == "author_fractional" ? AttributionBasis::AuthorFractional
                                                              : AttributionBasis::AddressFrequency;
        a.territory_id = f[2];
        if (a.territory_id.empty()) {
            a.outcome = AttributionOutcome::Unassigned;
            out.push_back(std::move(a));
            return;
        }
        a.outcome = AttributionOutcome::Assigned;
        a.share = Fraction::approx(parse_double_field(f[3], source, ln));
        if (a.level == TerritoryLevel::Lau) {
            a.territory = g.find_id(a.territory_id);
            if (!a.territory)
                throw DataError(source + ":" + std::to_string(ln) + ": territory '" +
                                a.territory_id + "' not in gazetteer");
            a.country_code = a.territory->country_code;
        } else {
            a.country_code = a.territory_id;
        }
        out.push_back(std::move(a));
    });
    return out;
}

}  // namespace citegrav
