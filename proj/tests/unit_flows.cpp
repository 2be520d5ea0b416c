#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include <citegrav/assignment.hpp>
#include <citegrav/flows.hpp>

using namespace citegrav;
using Catch::Matchers::WithinAbs;

namespace {

CountryAliases demo_aliases() {
    CountryAliases a;
    a.add("Italy", "IT");
    a.add("Germany", "DE");
    a.add("South Korea", "KR");
    a.add("France", "FR");
    a.add("USA", "US");
    return a;
}

Gazetteer demo_gazetteer() {
    Gazetteer g;
    g.add({"015146", TerritoryLevel::Lau, "Milan", "IT", GeoPoint{45.4642, 9.19}});
    g.add({"058091", TerritoryLevel::Lau, "Rome", "IT", GeoPoint{41.8931, 12.4828}});
    g.add({"037006", TerritoryLevel::Lau, "Bologna", "IT", GeoPoint{44.4939, 11.3426}});
    g.add({"087015", TerritoryLevel::Lau, "Catania", "IT", GeoPoint{37.5079, 15.083}});
    g.add_capital("KR", "Seoul", GeoPoint{37.5665, 126.978});
    g.add_capital("DE", "Berlin", GeoPoint{52.52, 13.405});
    g.add_capital("US", "Washington", GeoPoint{38.9072, -77.0369});
    g.add_capital("FR", "Paris", GeoPoint{48.8566, 2.3522});
    return g;
}

ContinentMap demo_continents() {
    ContinentMap m;
    m.add("IT", "Europe");
    m.add("DE", "Europe");
    m.add("FR", "Europe");
    m.add("KR", "Asia");
    m.add("US", "North America");
    return m;
}

CitedRecord cited(const std::string& id, int year, const std::string& affiliation) {
    CitedRecord r;
    r.pub_id = id;
    r.year = year;
    r.affiliations = {affiliation};
    r.authors = {{"A", {0}}};
    return r;
}

CitingRecord citing(const std::string& id, int year, const std::string& address,
                    std::vector<std::string> cites) {
    CitingRecord r;
    r.pub_id = id;
    r.year = year;
    r.addresses = {address};
    r.cites = std::move(cites);
    return r;
}

struct Fixture {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    std::vector<CitedRecord> cited_recs;
    std::vector<CitingRecord> citing_recs;
    std::vector<Attribution> cited_attrs;
    std::vector<Attribution> citing_lau;
    std::vector<Attribution> citing_country;
    YearMap cited_years;

    Fixture() {
        cited_recs = {
            cited("mi1", 2010, "Univ Milan, I-20122 Milan, Italy"),
            cited("mi2", 2011, "Politecn Milan, Milan, Italy"),
            cited("rm1", 2011, "Sapienza Univ Rome, Rome, Italy"),
            cited("bo1", 2012, "Univ Bologna, Bologna, Italy"),
            cited("old1", 2008, "Univ Bologna, Bologna, Italy"),
        };
        citing_recs = {
            citing("z.rm", 2013, "Univ Rome, Rome, Italy", {"mi1", "mi2", "bo1"}),
            citing("z.rm2", 2014, "CNR, Rome, Italy", {"mi1", "rm1"}),
            citing("z.mi", 2015, "Univ Milan, Milan, Italy", {"rm1", "bo1"}),
            citing("z.ct", 2016, "Univ Catania, Catania, Italy", {"mi1", "old1"}),
            citing("z.kr", 2013, "Seoul Natl Univ, Seoul, South Korea", {"mi1", "bo1"}),
            citing("z.de", 2014, "Heidelberg Univ, Heidelberg, Germany", {"rm1"}),
            citing("z.us", 2015, "Harvard Univ, Cambridge, MA 02138 USA", {"mi1", "ghost"}),
            citing("z.late", 2019, "Univ Rome, Rome, Italy", {"mi1"}),
            citing("z.dark", 2014, "Mystery Inst", {"mi1"}),
        };
        for (const CitedRecord& r : cited_recs)
            cited_attrs.push_back(prevalent_territory_cited(r, g, aliases));
        for (const CitingRecord& r : citing_recs) {
            Attribution c = prevalent_country_citing(r, aliases);
            citing_country.push_back(c);
            Attribution l;
            if (c.assigned() && c.territory_id == "IT") {
                l = prevalent_lau_citing(r, "IT", g, aliases);
            } else {
                l.pub_id = r.pub_id;
                l.basis = AttributionBasis::AddressFrequency;
                l.level = TerritoryLevel::Lau;
                l.outcome = AttributionOutcome::Unassigned;
            }
            citing_lau.push_back(l);
        }
        cited_years = year_map(cited_recs);
    }

    FlowOptions options(AnalysisLevel level) const {
        FlowOptions o;
        o.level = level;
        o.home = "IT";
        return o;
    }
};

double total_citations(const std::vector<FlowEdge>& edges) {
    double s = 0.0;
    for (const FlowEdge& e : edges) s += e.citations;
    return s;
}

const FlowEdge* find_edge(const std::vector<FlowEdge>& edges, const std::string& i,
                          const std::string& j) {
    for (const FlowEdge& e : edges)
        if (e.cited_id == i && e.citing_id == j) return &e;
    return nullptr;
}

}  // namespace

TEST_CASE("national flows conserve every citation pair") {
    Fixture f;
    FlowResult r = build_flow_edges(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                                    f.options(AnalysisLevel::National), f.g);
    CHECK(r.total_pairs == 16);
    CHECK(total_citations(r.edges) + static_cast<double>(r.dropped.total()) ==
          static_cast<double>(r.total_pairs));

    // Drop ledger is itemized: the foreign and unparseable citers, the late
    // citer, and the pre-window cited publication. z.us's unknown cited id
    // never surfaces here because the record is dropped at the citing stage.
    CHECK(r.dropped.reasons.at("citing publication unassigned") == 6);
    CHECK(r.dropped.reasons.at("citing publication outside year window") == 1);
    CHECK(r.dropped.reasons.at("cited publication outside year window") == 1);
    CHECK_FALSE(r.dropped.reasons.contains("cited publication unknown"));
    CHECK(total_citations(r.edges) == 8.0);
}

TEST_CASE("national distances are LAU to LAU") {
    Fixture f;
    FlowResult r = build_flow_edges(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                                    f.options(AnalysisLevel::National), f.g);
    const FlowEdge* milan_rome = find_edge(r.edges, "015146", "058091");
    REQUIRE(milan_rome != nullptr);
    CHECK(milan_rome->citations == 3.0);  // mi1+mi2 from z.rm, mi1 from z.rm2
    CHECK_THAT(milan_rome->distance_km, WithinAbs(477.185982738325, 1e-9));
}

TEST_CASE("international flows use the citing country capital and skip home citers") {
    Fixture f;
    FlowResult r = build_flow_edges(f.cited_attrs, f.citing_country, f.citing_recs, f.cited_years,
                                    f.options(AnalysisLevel::International), f.g);
    CHECK(r.dropped.reasons.at("home-country citing publication") == 9);
    CHECK(r.dropped.reasons.at("cited publication unknown") == 1);
    const FlowEdge* milan_kr = find_edge(r.edges, "015146", "KR");
    REQUIRE(milan_kr != nullptr);
    GeoPoint milan{45.4642, 9.19};
    GeoPoint seoul{37.5665, 126.978};
    CHECK(milan_kr->distance_km == great_circle_distance(milan, seoul));
    CHECK(total_citations(r.edges) + static_cast<double>(r.dropped.total()) ==
          static_cast<double>(r.total_pairs));
}

TEST_CASE("partitions split international flows without losing pairs") {
    Fixture f;
    ContinentMap continents = demo_continents();
    FlowOptions all = f.options(AnalysisLevel::International);
    FlowOptions cont = all;
    cont.partition = Partition::Continental;
    FlowOptions inter = all;
    inter.partition = Partition::Intercontinental;

    FlowResult r_all = build_flow_edges(f.cited_attrs, f.citing_country, f.citing_recs,
                                        f.cited_years, all, f.g, &continents);
    FlowResult r_cont = build_flow_edges(f.cited_attrs, f.citing_country, f.citing_recs,
                                         f.cited_years, cont, f.g, &continents);
    FlowResult r_inter = build_flow_edges(f.cited_attrs, f.citing_country, f.citing_recs,
                                          f.cited_years, inter, f.g, &continents);

    CHECK(total_citations(r_cont.edges) + total_citations(r_inter.edges) ==
          total_citations(r_all.edges));
    for (const FlowEdge& e : r_cont.edges) CHECK(*continents.continent(e.citing_id) == "Europe");
    for (const FlowEdge& e : r_inter.edges) CHECK(*continents.continent(e.citing_id) != "Europe");
    // The partition gate runs per citing record, before cited-side lookups,
    // so the US record's ghost pair lands here rather than in the unknown
    // ledger it gets under the opposite partition: 2 KR + 2 US = 4.
    CHECK(r_cont.dropped.reasons.at("outside requested partition") == 4);
    CHECK(r_inter.dropped.reasons.at("outside requested partition") == 1);
    CHECK(r_inter.dropped.reasons.at("cited publication unknown") == 1);
    CHECK(static_cast<std::size_t>(total_citations(r_cont.edges)) + r_cont.dropped.total() ==
          r_cont.total_pairs);
    CHECK(static_cast<std::size_t>(total_citations(r_inter.edges)) + r_inter.dropped.total() ==
          r_inter.total_pairs);
}

TEST_CASE("requesting a partition without a continent map is a config error") {
    Fixture f;
    FlowOptions opt = f.options(AnalysisLevel::International);
    opt.partition = Partition::Continental;
    CHECK_THROWS_AS(build_flow_edges(f.cited_attrs, f.citing_country, f.citing_recs,
                                     f.cited_years, opt, f.g),
                    ConfigError);
}

TEST_CASE("aggregation merges repeated territory pairs") {
    Fixture f;
    FlowResult r = build_flow_edges(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                                    f.options(AnalysisLevel::National), f.g);
    for (std::size_t i = 1; i < r.edges.size(); ++i) {
        auto key = [](const FlowEdge& e) { return std::tie(e.cited_id, e.citing_id); };
        CHECK(key(r.edges[i - 1]) < key(r.edges[i]));  // sorted, unique
    }
}

TEST_CASE("masses count publications inside the year window") {
    Fixture f;
    MassTable cited_masses = compute_masses(f.cited_attrs, f.cited_years, YearWindow{2010, 2012});
    CHECK(cited_masses.at("015146") == 2.0);
    CHECK(cited_masses.at("058091") == 1.0);
    CHECK(cited_masses.at("037006") == 1.0);  // old1 is outside the window
    CHECK_THROWS_AS(cited_masses.at("999999"), DataError);

    YearMap citing_years = year_map(f.citing_recs);
    MassTable citing_masses = compute_masses(f.citing_lau, citing_years, YearWindow{2010, 2017});
    CHECK(citing_masses.at("058091") == 2.0);  // z.late falls outside
    CHECK(citing_masses.at("087015") == 1.0);
}

TEST_CASE("publication report separates national, foreign, and combined views") {
    Fixture f;
    PairResult national =
        build_citation_pairs(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::National), f.g);
    PairResult international =
        build_citation_pairs(f.cited_attrs, f.citing_country, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::International), f.g);

    PublicationReportRow row = publication_report("mi1", national, international);
    CHECK(row.natl_citations == 3);     // z.rm, z.rm2, z.ct
    CHECK(row.foreign_citations == 2);  // z.kr, z.us
    CHECK(row.intl_citations == 5);     // home citers enter at their LAU distance
    CHECK(row.intl_avg_km > row.natl_avg_km);
    CHECK_THROWS_AS(publication_report("ghost", national, international), DataError);
}

TEST_CASE("report averages do not depend on pair order") {
    Fixture f;
    PairResult national =
        build_citation_pairs(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::National), f.g);
    PairResult international =
        build_citation_pairs(f.cited_attrs, f.citing_country, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::International), f.g);
    PairResult nat_rev = national;
    PairResult intl_rev = international;
    std::reverse(nat_rev.pairs.begin(), nat_rev.pairs.end());
    std::reverse(intl_rev.pairs.begin(), intl_rev.pairs.end());

    PublicationReportRow a = publication_report("mi1", national, international);
    PublicationReportRow b = publication_report("mi1", nat_rev, intl_rev);
    CHECK(a.intl_avg_km == b.intl_avg_km);
    CHECK(a.natl_avg_km == b.natl_avg_km);
}

TEST_CASE("territory report aggregates publications and flags local-only ones") {
    Fixture f;
    PairResult national =
        build_citation_pairs(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::National), f.g);
    PairResult international =
        build_citation_pairs(f.cited_attrs, f.citing_country, f.citing_recs, f.cited_years,
                             f.options(AnalysisLevel::International), f.g);
    std::vector<TerritoryReportRow> rows = all_territory_rows(national, international, f.g);
    auto milan = std::find_if(rows.begin(), rows.end(),
                              [](const TerritoryReportRow& r) { return r.name == "Milan"; });
    REQUIRE(milan != rows.end());
    CHECK(milan->territory_id == "015146");
    CHECK(milan->cited_pubs == 2);
    CHECK(milan->natl_citations == 4);
    CHECK(milan->foreign_citations == 2);
    CHECK(milan->intl_citations == 6);
    CHECK(milan->local_only_share == 0.0);
}

TEST_CASE("edges and masses survive a CSV round trip") {
    Fixture f;
    FlowResult r = build_flow_edges(f.cited_attrs, f.citing_lau, f.citing_recs, f.cited_years,
                                    f.options(AnalysisLevel::National), f.g);
    std::ostringstream out;
    write_edges_csv(out, AnalysisLevel::National, r.edges);
    std::istringstream in(out.str());
    std::vector<LeveledEdge> back = read_edges_csv(in, "mem");
    REQUIRE(back.size() == r.edges.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].level == AnalysisLevel::National);
        CHECK(back[i].edge.cited_id == r.edges[i].cited_id);
        CHECK(back[i].edge.citing_id == r.edges[i].citing_id);
        CHECK(back[i].edge.citations == r.edges[i].citations);
        CHECK(back[i].edge.distance_km == r.edges[i].distance_km);  // shortest round-trip format
    }

    MassTable masses = compute_masses(f.cited_attrs, f.cited_years, YearWindow{2010, 2012});
    std::ostringstream mout;
    write_masses_csv(mout, masses);
    std::istringstream min(mout.str());
    MassTable mback = read_masses_csv(min, "mem");
    CHECK(mback.counts == masses.counts);
}

TEST_CASE("level and partition names parse both ways") {
    CHECK(parse_level("national") == AnalysisLevel::National);
    CHECK(parse_level("International") == AnalysisLevel::International);
    CHECK_THROWS_AS(parse_level("municipal"), ConfigError);
    CHECK(parse_partition("all") == Partition::All);
    CHECK(parse_partition("continental") == Partition::Continental);
    CHECK(parse_partition("intercontinental") == Partition::Intercontinental);
    CHECK_THROWS_AS(parse_partition("both"), ConfigError);
    CHECK(to_string(AnalysisLevel::National) == "national");
    CHECK(to_string(Partition::Intercontinental) == "intercontinental");
}
