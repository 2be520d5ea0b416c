#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <citegrav/ingest.hpp>

using namespace citegrav;

namespace {

CountryAliases demo_aliases() {
    CountryAliases a;
    a.add("Italy", "IT");
    a.add("Germany", "DE");
    a.add("South Korea", "KR");
    a.add("Peoples R China", "CN");
    a.add("Taiwan", "TW");
    a.add("United States", "US");
    a.add("USA", "US");
    a.add("Switzerland", "CH");
    a.add("England", "GB");
    a.add("France", "FR");
    a.add("Canada", "CA");
    return a;
}

struct Expected {
    const char* address;
    const char* city;
    const char* code;
};

}  // namespace

TEST_CASE("address parser handles real affiliation strings") {
    CountryAliases aliases = demo_aliases();
    const Expected cases[] = {
        {"Univ Bologna, Dept Psychol, I-40127 Bologna, Italy", "Bologna", "IT"},
        {"Rhein Westfal TH Aachen, Div Cognit Neurol, D-52062 Aachen, Germany", "Aachen", "DE"},
        {"Univ Catanzaro, Dept Med Sci, Catanzaro, Italy", "Catanzaro", "IT"},
        {"Univ Bologna, Dept Commun Disciplines, Bologna, Italy", "Bologna", "IT"},
        {"Univ Parma, Dept Neurosci, I-43100 Parma, Italy", "Parma", "IT"},
        {"CNR, Inst Cognit Sci & Technol, Rome, Italy", "Rome", "IT"},
        {"Catholic Univ Korea, Seoul St Marys Hosp, Div Hematol, Seoul 137701, South Korea",
         "Seoul", "KR"},
        {"Seoul Natl Univ, Coll Med, Seoul, South Korea", "Seoul", "KR"},
        {"Shanghai Med Univ 2, Ruijin Hosp, Shanghai, Peoples R China", "Shanghai", "CN"},
        {"Hannover Med Sch, D-30623 Hannover, Germany", "Hannover", "DE"},
        {"Taipei City Hosp, Taipei, Taiwan", "Taipei", "TW"},
        {"Novartis Pharmaceut, E Hanover, NJ USA", "E Hanover", "US"},
        {"Novartis Pharma AG, Basel, Switzerland", "Basel", "CH"},
        {"UCL, London, England", "London", "GB"},
        {"Hop Prive Jacques Cartier, Inst Cardiovasc Paris, Gen Sante, Dept Cardiol, Massy, "
         "France",
         "Massy", "FR"},
        {"CHU Cavale Blanche, Dept Cardiol, Brest, France", "Brest", "FR"},
        {"Columbia Univ, Med Ctr, Dept Cardiol, New York, NY USA", "New York", "US"},
        {"New York Presbyterian Hosp, New York, NY USA", "New York", "US"},
        {"Univ British Columbia, Dept Cardiol, Vancouver, BC V5Z 1M9, Canada", "Vancouver", "CA"},
        {"Univ Laval, Quebec Heart & Lung Inst, Dept Cardiol, Quebec City, PQ, Canada",
         "Quebec City", "CA"},
        {"Univ Catania, Ferrarotto Hosp, Dept Cardiol, Catania, Italy", "Catania", "IT"},
        {"ETNA Fdn, Catania, Italy", "Catania", "IT"},
        {"Univ Turin, Div Cardiol, Citta Salute & Sci, Turin, Italy", "Turin", "IT"},
        {"Imperial Coll Healthcare NHS Trust, Div Cardiol, London, England", "London", "GB"},
        {"Univ Birmingham, Queen Elizabeth Hosp, Birmingham B15 2TH, W Midlands, England",
         "Birmingham", "GB"},
    };
    for (const Expected& e : cases) {
        CAPTURE(e.address);
        auto parsed = parse_address(e.address, aliases);
        REQUIRE(parsed.has_value());
        CHECK(parsed->city == e.city);
        CHECK(parsed->country_code == e.code);
    }
}

TEST_CASE("address parser rejects what it cannot place") {
    CountryAliases aliases = demo_aliases();
    CHECK_FALSE(parse_address("Somewhere", aliases).has_value());
    CHECK_FALSE(parse_address("Univ Nowhere, Atlantis", aliases).has_value());
    CHECK_FALSE(parse_address("", aliases).has_value());
    CHECK_FALSE(parse_address(", , Italy", aliases).has_value());
}

TEST_CASE("cited loader keeps good lines and counts bad ones") {
    std::istringstream in(R"({"pub_id":"p1","year":2011,"affiliations":["Univ Bologna, Bologna, Italy"],"authors":[{"key":"A","affil_idx":[0]}]}
not json at all
{"pub_id":"","year":2011,"affiliations":["x, y, Italy"],"authors":[]}
{"pub_id":"p2","year":2011,"affiliations":["Univ Parma, Parma, Italy"],"authors":[{"key":"B","affil_idx":[3]}]}

{"pub_id":"p3","affiliations":["Univ Parma, Parma, Italy"],"authors":[]}
{"pub_id":"p4","year":2012,"affiliations":["Univ Rome, Rome, Italy"],"authors":[{"key":"C","affil_idx":[0]},{"key":"D","affil_idx":[0]}]}
)");
    LoadResult<CitedRecord> r = load_cited(in, "mem");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].pub_id == "p1");
    CHECK(r.records[1].pub_id == "p4");
    CHECK(r.records[1].authors.size() == 2);
    CHECK(r.stats.lines_total == 6);  // blank line not counted
    CHECK(r.stats.records_loaded == 2);
    CHECK(r.stats.lines_skipped == 4);
    REQUIRE(r.stats.diagnostics.size() == 4);
    CHECK(r.stats.diagnostics[0].find("mem:2") != std::string::npos);
}

TEST_CASE("citing loader requires addresses and nonempty cites") {
    std::istringstream in(R"({"pub_id":"z1","year":2013,"addresses":["Univ Milan, Milan, Italy"],"cites":["p1"]}
{"pub_id":"z2","year":2013,"addresses":[],"cites":["p1","p2"]}
{"pub_id":"z3","year":2013,"addresses":["Univ Milan, Milan, Italy"],"cites":[]}
{"pub_id":"z4","year":2013,"cites":["p1"]}
)");
    LoadResult<CitingRecord> r = load_citing(in, "mem");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].pub_id == "z1");
    CHECK(r.records[1].pub_id == "z2");  // empty address list is a data fact, not an error
    CHECK(r.records[1].addresses.empty());
    CHECK(r.stats.lines_skipped == 2);
}

TEST_CASE("alias resolution is case and spacing insensitive") {
    CountryAliases aliases = demo_aliases();
    CHECK(aliases.resolve("ITALY") == "IT");
    CHECK(aliases.resolve("  italy ") == "IT");
    CHECK(aliases.resolve("IT") == "IT");  // bare known code
    CHECK_FALSE(aliases.resolve("XX").has_value());
    CHECK(aliases.canonical_name("US") == "United States");
}
