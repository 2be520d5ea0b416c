#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citegrav/assignment.hpp"
#include "citegrav/csv.hpp"
#include "citegrav/error.hpp"
#include "citegrav/gazetteer.hpp"
#include "citegrav/geo.hpp"
#include "citegrav/records.hpp"

namespace citegrav {

enum class AnalysisLevel { National, International };
enum class Partition { All, Continental, Intercontinental };

inline std::string_view to_string(AnalysisLevel level) {
    return level == AnalysisLevel::National ? "national" : "international";
}

inline std::string_view to_string(Partition p) {
    switch (p) {
        case Partition::All: return "all";
        case Partition::Continental: return "continental";
        case Partition::Intercontinental: return "intercontinental";
    }
    return "all";
}

inline AnalysisLevel parse_level(std::string_view s) {
    std::string n = normalize_name(s);
    if (n == "national") return AnalysisLevel::National;
    if (n == "international") return AnalysisLevel::International;
    throw ConfigError("unknown analysis level '" + std::string(s) + "'");
}

inline Partition parse_partition(std::string_view s) {
    std::string n = normalize_name(s);
    if (n == "all") return Partition::All;
    if (n == "continental") return Partition::Continental;
    if (n == "intercontinental") return Partition::Intercontinental;
    throw ConfigError("unknown partition '" + std::string(s) + "'");
}

// Inclusive year range.
struct YearWindow {
    int first = 0;
    int last = 9999;
    bool contains(int year) const { return year >= first && year <= last; }
};

// country_code -> continent name, for the continental/intercontinental split.
class ContinentMap {
  public:
    void add(std::string_view iso2, std::string_view continent) {
        map_.insert_or_assign(std::string(iso2), std::string(continent));
    }

    // Continents CSV: country_code,continent (header required).
    static ContinentMap from_csv(std::istream& in, const std::string& source) {
        ContinentMap m;
        static constexpr std::array<std::string_view, 2> kHeader = {"country_code", "continent"};
        read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t) {
            m.add(f[0], f[1]);
        });
        return m;
    }

    std::optional<std::string> continent(const std::string& iso2) const {
        auto it = map_.find(iso2);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return map_.size(); }

  private:
    std::unordered_map<std::string, std::string> map_;
};

struct FlowOptions {
    AnalysisLevel level = AnalysisLevel::National;
    Partition partition = Partition::All;
    std::string home = "IT";
    YearWindow cited_window{2010, 2012};
    YearWindow citing_window{2010, 2017};
};

// One counted citation: citing_pub cites cited_pub, resolved to territories.
// citing_id is a LAU id at the national level, an ISO country code at the
// international level.
struct CitationPair {
    std::string cited_pub;
    std::string citing_pub;
    std::string cited_id;
    std::string citing_id;
    double distance_km = 0.0;
};

// Pair counts by reason, so edge totals reconcile exactly against inputs.
struct DropLedger {
    std::map<std::string, std::size_t> reasons;

    void add(const std::string& reason, std::size_t n = 1) { reasons[reason] += n; }

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& [r, n] : reasons) t += n;
        return t;
    }
};

struct PairResult {
    std::vector<CitationPair> pairs;
    DropLedger dropped;
    std::size_t total_pairs = 0;  // every (citing record, cite entry) seen

    bool conserved() const { return pairs.size() + dropped.total() == total_pairs; }
};

// Aggregated flow between two territories. citations is integral for
// observed data; the synthetic generator's continuous mode writes fractional
// expectations through the same format.
struct FlowEdge {
    std::string cited_id;
    std::string citing_id;
    double citations = 0.0;
    double distance_km = 0.0;
};

using YearMap = std::unordered_map<std::string, int>;

template <typename Record>
YearMap year_map(const std::vector<Record>& records) {
    YearMap m;
    for (const Record& r : records) m.insert_or_assign(r.pub_id, r.year);
    return m;
}

namespace detail {

inline std::unordered_map<std::string, const Attribution*> index_attributions(
    const std::vector<Attribution>& attrs, TerritoryLevel expected, const char* side) {
    std::unordered_map<std::string, const Attribution*> idx;
    for (const Attribution& a : attrs) {
        if (a.level != expected)
            throw DataError(std::string(side) + " attribution for '" + a.pub_id +
                            "' is at the wrong level");
        if (!idx.emplace(a.pub_id, &a).second)
            throw DataError(std::string(side) + " attribution for '" + a.pub_id + "' duplicated");
    }
    return idx;
}

}  // namespace detail

// Resolves every (citing record, cite entry) pair to a territory pair with a
// geodesic distance, or to a named drop reason. National pairs run LAU to
// LAU; international pairs run cited LAU to the citing country's capital,
// with home-country citers excluded by construction. pairs + drops = inputs,
// exactly, always.
inline PairResult build_citation_pairs(const std::vector<Attribution>& cited_attrs,
                                       const std::vector<Attribution>& citing_attrs,
                                       const std::vector<CitingRecord>& citing_recs,
                                       const YearMap& cited_years, const FlowOptions& opt,
                                       const Gazetteer& g,
                                       const ContinentMap* continents = nullptr) {
    const bool national = opt.level == AnalysisLevel::National;
    auto cited_idx = detail::index_attributions(cited_attrs, TerritoryLevel::Lau, "cited");
    auto citing_idx = detail::index_attributions(
        citing_attrs, national ? TerritoryLevel::Lau : TerritoryLevel::Country, "citing");

    std::string home_continent;
    if (!national && opt.partition != Partition::All) {
        if (!continents) throw ConfigError("partition requested without a continent map");
        auto c = continents->continent(opt.home);
        if (!c) throw DataError("no continent for home country '" + opt.home + "'");
        home_continent = *c;
    }

    // Distances repeat across pairs of one territory pair; cache them.
    std::map<std::pair<std::string, std::string>, double> distance_cache;

    PairResult out;
    for (const CitingRecord& rec : citing_recs) {
        out.total_pairs += rec.cites.size();
        if (!opt.citing_window.contains(rec.year)) {
            out.dropped.add("citing publication outside year window", rec.cites.size());
            continue;
        }
        auto cit = citing_idx.find(rec.pub_id);
        if (cit == citing_idx.end()) {
            out.dropped.add("citing publication not in attributions", rec.cites.size());
            continue;
        }
        const Attribution& citing = *cit->second;
        if (!citing.assigned()) {
            out.dropped.add("citing publication unassigned", rec.cites.size());
            continue;
        }
        if (!national) {
            if (citing.territory_id == opt.home) {
                out.dropped.add("home-country citing publication", rec.cites.size());
                continue;
            }
            if (opt.partition != Partition::All) {
                auto c = continents->continent(citing.territory_id);
                if (!c)
                    throw DataError("no continent for country '" + citing.territory_id + "'");
                bool continental = *c == home_continent;
                if (continental != (opt.partition == Partition::Continental)) {
                    out.dropped.add("outside requested partition", rec.cites.size());
                    continue;
                }
            }
        }
        for (const std::string& target : rec.cites) {
            auto ced = cited_idx.find(target);
            if (ced == cited_idx.end()) {
                out.dropped.add("cited publication unknown");
                continue;
            }
            const Attribution& cited = *ced->second;
            if (!cited.assigned()) {
                out.dropped.add("cited publication unassigned");
                continue;
            }
            auto yit = cited_years.find(target);
            if (yit == cited_years.end())
                throw DataError("no year for cited publication '" + target + "'");
            if (!opt.cited_window.contains(yit->second)) {
                out.dropped.add("cited publication outside year window");
                continue;
            }
            auto key = std::make_pair(cited.territory_id, citing.territory_id);
            auto dit = distance_cache.find(key);
            if (dit == distance_cache.end()) {
                const Territory* from = cited.territory ? cited.territory
                                                        : g.find_id(cited.territory_id);
                if (!from)
                    throw DataError("territory '" + cited.territory_id + "' not in gazetteer");
                GeoPoint to = national
                                  ? [&] {
                                        const Territory* t = citing.territory
                                                                 ? citing.territory
                                                                 : g.find_id(citing.territory_id);
                                        if (!t)
                                            throw DataError("territory '" + citing.territory_id +
                                                            "' not in gazetteer");
                                        return t->centroid;
                                    }()
                                  : g.capital(citing.territory_id);
                dit = distance_cache
                          .emplace(key, great_circle_distance(from->centroid, to))
                          .first;
            }
            out.pairs.push_back(CitationPair{target, rec.pub_id, cited.territory_id,
                                             citing.territory_id, dit->second});
        }
    }
    return out;
}

// Collapses pairs into one edge per (cited, citing) territory pair, sorted.
inline std::vector<FlowEdge> aggregate_edges(const std::vector<CitationPair>& pairs) {
    std::map<std::pair<std::string, std::string>, FlowEdge> acc;
    for (const CitationPair& p : pairs) {
        auto key = std::make_pair(p.cited_id, p.citing_id);
        auto [it, inserted] = acc.try_emplace(key, FlowEdge{p.cited_id, p.citing_id, 0.0,
                                                            p.distance_km});
        it->second.citations += 1.0;
    }
    std::vector<FlowEdge> out;
    out.reserve(acc.size());
    for (auto& [key, e] : acc) out.push_back(std::move(e));
    return out;
}

struct FlowResult {
    std::vector<FlowEdge> edges;
    DropLedger dropped;
    std::size_t total_pairs = 0;
};

inline FlowResult build_flow_edges(const std::vector<Attribution>& cited_attrs,
                                   const std::vector<Attribution>& citing_attrs,
                                   const std::vector<CitingRecord>& citing_recs,
                                   const YearMap& cited_years, const FlowOptions& opt,
                                   const Gazetteer& g, const ContinentMap* continents = nullptr) {
    PairResult pairs =
        build_citation_pairs(cited_attrs, citing_attrs, citing_recs, cited_years, opt, g,
                             continents);
    return FlowResult{aggregate_edges(pairs.pairs), std::move(pairs.dropped), pairs.total_pairs};
}

// Publication counts per territory over an attribution set, within a year
// window. Values are integral for observed data; the synthetic path shares
// the table shape with continuous masses.
struct MassTable {
    std::map<std::string, double> counts;

    double at(const std::string& territory_id) const {
        auto it = counts.find(territory_id);
        if (it == counts.end())
            throw DataError("no mass entry for territory '" + territory_id + "'");
        return it->second;
    }

    bool contains(const std::string& territory_id) const {
        return counts.contains(territory_id);
    }
};

inline MassTable compute_masses(const std::vector<Attribution>& attrs, const YearMap& years,
                                YearWindow window) {
    MassTable table;
    for (const Attribution& a : attrs) {
        if (!a.assigned()) continue;
        auto it = years.find(a.pub_id);
        if (it == years.end()) throw DataError("no year for publication '" + a.pub_id + "'");
        if (!window.contains(it->second)) continue;
        table.counts[a.territory_id] += 1.0;
    }
    return table;
}

namespace detail {

// Sorting before summing makes the mean a function of the multiset alone,
// so reports never depend on pair order.
inline double stable_mean(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace detail

// One row of the per-publication flow report. The international column group
// counts every resolvable citing publication, home-country ones at their LAU
// distance (the table convention this mirrors includes them); the foreign
// columns are the strict cross-border variant.
struct PublicationReportRow {
    std::string pub_id;
    std::size_t intl_citations = 0;
    double intl_avg_km = 0.0;
    std::size_t foreign_citations = 0;
    double foreign_avg_km = 0.0;
    std::size_t natl_citations = 0;
    double natl_avg_km = 0.0;
};

namespace detail {

struct PairBuckets {
    std::vector<double> national;  // home citers, LAU to LAU
    std::vector<double> foreign;   // foreign citers, LAU to capital
};

inline PublicationReportRow row_from_buckets(PairBuckets b) {
    PublicationReportRow row;
    row.natl_citations = b.national.size();
    row.natl_avg_km = stable_mean(b.national);
    row.foreign_citations = b.foreign.size();
    row.foreign_avg_km = stable_mean(b.foreign);
    std::vector<double> all = b.national;
    all.insert(all.end(), b.foreign.begin(), b.foreign.end());
    row.intl_citations = all.size();
    row.intl_avg_km = stable_mean(std::move(all));
    return row;
}

}  // namespace detail

inline PublicationReportRow publication_report(const std::string& pub_id,
                                               const PairResult& national,
                                               const PairResult& international) {
    detail::PairBuckets b;
    for (const CitationPair& p : national.pairs)
        if (p.cited_pub == pub_id) b.national.push_back(p.distance_km);
    for (const CitationPair& p : international.pairs)
        if (p.cited_pub == pub_id) b.foreign.push_back(p.distance_km);
    if (b.national.empty() && b.foreign.empty())
        throw DataError("publication '" + pub_id + "' has no counted citations");
    PublicationReportRow row = detail::row_from_buckets(std::move(b));
    row.pub_id = pub_id;
    return row;
}

inline std::vector<PublicationReportRow> all_publication_rows(const PairResult& national,
                                                              const PairResult& international) {
    std::map<std::string, detail::PairBuckets> buckets;
    for (const CitationPair& p : national.pairs)
        buckets[p.cited_pub].national.push_back(p.distance_km);
    for (const CitationPair& p : international.pairs)
        buckets[p.cited_pub].foreign.push_back(p.distance_km);
    std::vector<PublicationReportRow> rows;
    rows.reserve(buckets.size());
    for (auto& [pub, b] : buckets) {
        PublicationReportRow row = detail::row_from_buckets(std::move(b));
        row.pub_id = pub;
        rows.push_back(std::move(row));
    }
    return rows;
}

// One row of the per-territory flow report. local_only_share is the
// fraction of the territory's cited publications whose every counted
// citation comes from the territory itself.
struct TerritoryReportRow {
    std::string territory_id;
    std::string name;
    std::size_t cited_pubs = 0;
    std::size_t intl_citations = 0;
    double intl_avg_km = 0.0;
    std::size_t foreign_citations = 0;
    double foreign_avg_km = 0.0;
    std::size_t natl_citations = 0;
    double natl_avg_km = 0.0;
    double local_only_share = 0.0;
};

inline std::vector<TerritoryReportRow> all_territory_rows(const PairResult& national,
                                                          const PairResult& international,
                                                          const Gazetteer& g) {
    struct PubFlags {
        bool any = false;
        bool all_local = true;
    };
    std::map<std::string, detail::PairBuckets> buckets;
    std::map<std::string, std::map<std::string, PubFlags>> pubs;  // territory -> pub -> flags
    for (const CitationPair& p : national.pairs) {
        buckets[p.cited_id].national.push_back(p.distance_km);
        PubFlags& f = pubs[p.cited_id][p.cited_pub];
        f.any = true;
        f.all_local = f.all_local && p.citing_id == p.cited_id;
    }
    for (const CitationPair& p : international.pairs) {
        buckets[p.cited_id].foreign.push_back(p.distance_km);
        PubFlags& f = pubs[p.cited_id][p.cited_pub];
        f.any = true;
        f.all_local = false;  // a cross-border citation is never local
    }
    std::vector<TerritoryReportRow> rows;
    rows.reserve(buckets.size());
    for (auto& [territory, b] : buckets) {
        PublicationReportRow base = detail::row_from_buckets(std::move(b));
        TerritoryReportRow row;
        row.territory_id = territory;
        if (const Territory* t = g.find_id(territory)) row.name = t->name;
        row.intl_citations = base.intl_citations;
        row.intl_avg_km = base.intl_avg_km;
        row.foreign_citations = base.foreign_citations;
        row.foreign_avg_km = base.foreign_avg_km;
        row.natl_citations = base.natl_citations;
        row.natl_avg_km = base.natl_avg_km;
        std::size_t local_only = 0;
        for (const auto& [pub, flags] : pubs[territory]) {
            ++row.cited_pubs;
            if (flags.all_local) ++local_only;
        }
        row.local_only_share =
            row.cited_pubs == 0
                ? 0.0
                : static_cast<double>(local_only) / static_cast<double>(row.cited_pubs);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline TerritoryReportRow territory_report(const std::string& territory_id,
                                           const PairResult& national,
                                           const PairResult& international, const Gazetteer& g) {
    for (TerritoryReportRow& row : all_territory_rows(national, international, g))
        if (row.territory_id == territory_id) return row;
    throw DataError("territory '" + territory_id + "' has no counted citations");
}

// Edges CSV: level,cited_id,citing_id,citations,distance_km.
inline void write_edges_csv(std::ostream& out, AnalysisLevel level,
                            const std::vector<FlowEdge>& edges) {
    out << "level,cited_id,citing_id,citations,distance_km\n";
    for (const FlowEdge& e : edges)
        out << to_string(level) << ',' << csv_field(e.cited_id) << ',' << csv_field(e.citing_id)
            << ',' << format_double(e.citations) << ',' << format_double(e.distance_km) << '\n';
}

struct LeveledEdge {
    AnalysisLevel level;
    FlowEdge edge;
};

inline std::vector<LeveledEdge> read_edges_csv(std::istream& in, const std::string& source) {
    std::vector<LeveledEdge> out;
    static constexpr std::array<std::string_view, 5> kHeader = {"level", "cited_id", "citing_id",
                                                                "citations", "distance_km"};
    read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
        LeveledEdge e;
        e.level = parse_level(f[0]);
        e.edge.cited_id = f[1];
        e.edge.citing_id = f[2];
        e.edge.citations = parse_double_field(f[3], source, ln);
        e.edge.distance_km = parse_double_field(f[4], source, ln);
        out.push_back(std::move(e));
    });
    return out;
}

// Masses CSV: territory_id,mass.
inline void write_masses_csv(std::ostream& out, const MassTable& table) {
    out << "territory_id,mass\n";
    for (const auto& [id, mass] : table.counts)
        out << csv_field(id) << ',' << format_double(mass) << '\n';
}

inline MassTable read_masses_csv(std::istream& in, const std::string& source) {
    MassTable table;
    static constexpr std::array<std::string_view, 2> kHeader = {"territory_id", "mass"};
    read_csv(in, source, kHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
        table.counts[f[0]] = parse_double_field(f[1], source, ln);
    });
    return table;
}

// Drop ledger CSV: reason,pairs.
inline void write_drop_ledger_csv(std::ostream& out, const DropLedger& ledger) {
    out << "reason,pairs\n";
    for (const auto& [reason, n] : ledger.reasons)
        out << csv_field(reason) << ',' << n << '\n';
}

}  // namespace citegrav
