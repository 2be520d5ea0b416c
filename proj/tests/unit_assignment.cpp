#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include <citegrav/assignment.hpp>

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

Gazetteer demo_gazetteer() {
    Gazetteer g;
    g.add({"037006", TerritoryLevel::Lau, "Bologna", "IT", GeoPoint{44.4939, 11.3426}});
    g.add({"079023", TerritoryLevel::Lau, "Catanzaro", "IT", GeoPoint{38.9098, 16.5877}});
    g.add({"034027", TerritoryLevel::Lau, "Parma", "IT", GeoPoint{44.8015, 10.3279}});
    g.add({"058091", TerritoryLevel::Lau, "Rome", "IT", GeoPoint{41.8931, 12.4828}});
    g.add({"087015", TerritoryLevel::Lau, "Catania", "IT", GeoPoint{37.5079, 15.083}});
    g.add({"001272", TerritoryLevel::Lau, "Turin", "IT", GeoPoint{45.0703, 7.6869}});
    g.add({"015146", TerritoryLevel::Lau, "Milan", "IT", GeoPoint{45.4642, 9.19}});
    return g;
}

// Six authors over six affiliations; the last author splits over two.
CitedRecord six_author_record() {
    CitedRecord r;
    r.pub_id = "10.3389/fpsyg.2011.00227";
    r.year = 2011;
    r.affiliations = {
        "Univ Bologna, Dept Psychol, I-40127 Bologna, Italy",
        "Rhein Westfal TH Aachen, Div Cognit Neurol, D-52062 Aachen, Germany",
        "Univ Catanzaro, Dept Med Sci, Catanzaro, Italy",
        "Univ Bologna, Dept Commun Disciplines, Bologna, Italy",
        "Univ Parma, Dept Neurosci, I-43100 Parma, Italy",
        "CNR, Inst Cognit Sci & Technol, Rome, Italy",
    };
    r.authors = {{"Scorilli, C", {0}}, {"Binkofski, F", {1}}, {"Buccino, G", {2}},
                 {"Nicoletti, R", {3}}, {"Riggio, L", {4}},  {"Borghi, AM", {0, 5}}};
    return r;
}

CitingRecord eight_address_record() {
    CitingRecord r;
    r.pub_id = "10.1182/blood-2010-01-261289";
    r.year = 2010;
    r.addresses = {
        "Catholic Univ Korea, Seoul St Marys Hosp, Div Hematol, Seoul 137701, South Korea",
        "Seoul Natl Univ, Coll Med, Seoul, South Korea",
        "Shanghai Med Univ 2, Ruijin Hosp, Shanghai, Peoples R China",
        "Hannover Med Sch, D-30623 Hannover, Germany",
        "Taipei City Hosp, Taipei, Taiwan",
        "Novartis Pharmaceut, E Hanover, NJ USA",
        "Novartis Pharma AG, Basel, Switzerland",
        "UCL, London, England",
    };
    r.cites = {"whatever"};
    return r;
}

CitingRecord eleven_address_record() {
    CitingRecord r;
    r.pub_id = "10.1021/acs.inorgchem.8b02267";
    r.year = 2017;
    r.addresses = {
        "Hop Prive Jacques Cartier, Inst Cardiovasc Paris, Gen Sante, Dept Cardiol, Massy, "
        "France",
        "CHU Cavale Blanche, Dept Cardiol, Brest, France",
        "Columbia Univ, Med Ctr, Dept Cardiol, New York, NY USA",
        "New York Presbyterian Hosp, New York, NY USA",
        "Univ British Columbia, Dept Cardiol, Vancouver, BC V5Z 1M9, Canada",
        "Univ Laval, Quebec Heart & Lung Inst, Dept Cardiol, Quebec City, PQ, Canada",
        "Univ Catania, Ferrarotto Hosp, Dept Cardiol, Catania, Italy",
        "ETNA Fdn, Catania, Italy",
        "Univ Turin, Div Cardiol, Citta Salute & Sci, Turin, Italy",
        "Imperial Coll Healthcare NHS Trust, Div Cardiol, London, England",
        "Univ Birmingham, Queen Elizabeth Hosp, Birmingham B15 2TH, W Midlands, England",
    };
    r.cites = {"whatever"};
    return r;
}

}  // namespace

TEST_CASE("fractions stay exact") {
    CHECK(Fraction(1, 3) + Fraction(1, 6) == Fraction(1, 2));
    CHECK(Fraction(5, 2).over(6) == Fraction(5, 12));
    CHECK(Fraction(2, 8) == Fraction(1, 4));
    CHECK(Fraction(1, 3) < Fraction(1, 2));
    Fraction s;
    for (int i = 0; i < 6; ++i) s += Fraction(1, 6);
    CHECK(s == Fraction(1, 1));
    CHECK_THAT(Fraction::approx(5.0 / 12.0).value(), Catch::Matchers::WithinAbs(5.0 / 12.0, 1e-9));
}

TEST_CASE("author-fractional convention on the six-author byline") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec = six_author_record();

    CitedWeights w = cited_location_weights(rec, g, aliases);
    CHECK(w.counted_authors == 6);
    Fraction total;
    for (const LocationWeight& lw : w.locations) total += lw.weight;
    CHECK(total == Fraction(6, 1));  // weight is conserved exactly

    Attribution a = prevalent_territory_cited(rec, g, aliases);
    CHECK(a.outcome == AttributionOutcome::Assigned);
    CHECK(a.territory_id == "037006");
    REQUIRE(a.territory != nullptr);
    CHECK(a.territory->name == "Bologna");
    CHECK(a.share == Fraction(5, 12));  // 2.5 of 6 authorships, exactly
    CHECK(a.basis == AttributionBasis::AuthorFractional);
}

TEST_CASE("author order and affiliation listing order do not matter") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec = six_author_record();

    CitedRecord shuffled = rec;
    std::reverse(shuffled.authors.begin(), shuffled.authors.end());
    std::reverse(shuffled.affiliations.begin(), shuffled.affiliations.end());
    std::size_t last = rec.affiliations.size() - 1;
    for (AuthorLink& link : shuffled.authors)
        for (std::size_t& idx : link.affil_idx) idx = last - idx;

    Attribution a = prevalent_territory_cited(rec, g, aliases);
    Attribution b = prevalent_territory_cited(shuffled, g, aliases);
    CHECK(a.territory_id == b.territory_id);
    CHECK(a.share == b.share);
    CHECK(a.outcome == b.outcome);
}

TEST_CASE("repeated mentions of one location collapse to one") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec;
    rec.pub_id = "dup";
    rec.year = 2011;
    rec.affiliations = {"Univ Bologna, Dept Psychol, I-40127 Bologna, Italy",
                        "Univ Bologna, Dept Phys, Bologna, Italy",
                        "Univ Parma, Parma, Italy"};
    rec.authors = {{"A", {0, 1}}, {"B", {2}}};
    // Author A's two affiliations land on the same LAU, so A is one full
    // Bologna authorship, not two halves that could be diluted further.
    CitedWeights w = cited_location_weights(rec, g, aliases);
    REQUIRE(w.locations.size() == 2);
    Attribution a = prevalent_territory_cited(rec, g, aliases);
    CHECK(a.outcome == AttributionOutcome::Tie);  // Bologna 1 vs Parma 1

    rec.authors.push_back({"C", {0}});
    Attribution b = prevalent_territory_cited(rec, g, aliases);
    CHECK(b.outcome == AttributionOutcome::Assigned);
    CHECK(b.territory_id == "037006");
    CHECK(b.share == Fraction(2, 3));
}

TEST_CASE("adding an affiliation in the winning territory never flips the winner") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec = six_author_record();
    Attribution before = prevalent_territory_cited(rec, g, aliases);
    REQUIRE(before.territory_id == "037006");

    rec.affiliations.push_back("Osped Maggiore, Bologna, Italy");
    rec.authors.push_back({"New, A", {rec.affiliations.size() - 1}});
    Attribution after = prevalent_territory_cited(rec, g, aliases);
    CHECK(after.territory_id == "037006");
    CHECK(after.share == Fraction(1, 2));  // 3.5 of 7 authorships now
}

TEST_CASE("prevalent location outside the gazetteer is winner-unmatched") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec;
    rec.pub_id = "foreign-winner";
    rec.year = 2012;
    rec.affiliations = {"Rhein Westfal TH Aachen, D-52062 Aachen, Germany",
                        "Univ Klinikum Aachen, Aachen, Germany",
                        "Univ Bologna, Bologna, Italy"};
    rec.authors = {{"A", {0}}, {"B", {1}}, {"C", {2}}};
    Attribution a = prevalent_territory_cited(rec, g, aliases);
    CHECK(a.outcome == AttributionOutcome::WinnerUnmatched);
    CHECK_FALSE(a.assigned());
    CHECK(a.country_code == "DE");
    CHECK(a.share == Fraction(2, 3));
}

TEST_CASE("record with no parseable affiliation yields no locations") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitedRecord rec;
    rec.pub_id = "opaque";
    rec.year = 2012;
    rec.affiliations = {"Mystery Inst"};
    rec.authors = {{"A", {0}}};
    Attribution a = prevalent_territory_cited(rec, g, aliases);
    CHECK(a.outcome == AttributionOutcome::NoLocations);
}

TEST_CASE("address-frequency convention on the eight-address list") {
    CountryAliases aliases = demo_aliases();
    Attribution a = prevalent_country_citing(eight_address_record(), aliases);
    CHECK(a.outcome == AttributionOutcome::Assigned);
    CHECK(a.territory_id == "KR");
    CHECK(a.share == Fraction(2, 8));
    CHECK(a.basis == AttributionBasis::AddressFrequency);
    CHECK(a.level == TerritoryLevel::Country);
}

TEST_CASE("LAU refinement on the eleven-address list") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();
    CitingRecord rec = eleven_address_record();

    Attribution country = prevalent_country_citing(rec, aliases);
    CHECK(country.territory_id == "IT");
    CHECK(country.share == Fraction(3, 11));

    Attribution lau = prevalent_lau_citing(rec, "IT", g, aliases);
    CHECK(lau.outcome == AttributionOutcome::Assigned);
    CHECK(lau.territory_id == "087015");
    REQUIRE(lau.territory != nullptr);
    CHECK(lau.territory->name == "Catania");
    CHECK(lau.share == Fraction(2, 3));  // Catania 2 of the 3 Italian addresses
}

TEST_CASE("country tie between two countries is reported as a tie") {
    CountryAliases aliases = demo_aliases();
    CitingRecord rec;
    rec.pub_id = "tie";
    rec.year = 2014;
    rec.addresses = {"Univ Milan, Milan, Italy", "Univ Paris, Paris, France"};
    rec.cites = {"x"};
    Attribution a = prevalent_country_citing(rec, aliases);
    CHECK(a.outcome == AttributionOutcome::Tie);
}

TEST_CASE("convention agreement over a mixed sample") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();

    CitedRecord agree_cited;
    agree_cited.pub_id = "joint1";
    agree_cited.year = 2013;
    agree_cited.affiliations = {"Univ Bologna, Bologna, Italy"};
    agree_cited.authors = {{"A", {0}}};
    CitingRecord agree_citing;
    agree_citing.pub_id = "joint1";
    agree_citing.year = 2013;
    agree_citing.addresses = {"Univ Bologna, Bologna, Italy"};
    agree_citing.cites = {"x"};

    CitedRecord split_cited;
    split_cited.pub_id = "joint2";
    split_cited.year = 2013;
    split_cited.affiliations = {"Univ Oxford, Oxford, England", "Univ Parma, Parma, Italy"};
    split_cited.authors = {{"A", {1}}, {"B", {1}}, {"C", {0}}};
    CitingRecord split_citing;
    split_citing.pub_id = "joint2";
    split_citing.year = 2013;
    split_citing.addresses = {"Univ Oxford, Oxford, England"};
    split_citing.cites = {"x"};

    std::vector<PublicationViews> views = {{&agree_cited, &agree_citing},
                                           {&split_cited, &split_citing}};
    CHECK(convention_agreement(views, aliases, &g) == 0.5);
    CHECK_THROWS_AS(convention_agreement({}, aliases, &g), DataError);
}

TEST_CASE("attribution CSV round-trips ids, outcomes, and shares") {
    Gazetteer g = demo_gazetteer();
    CountryAliases aliases = demo_aliases();

    std::vector<Attribution> attrs;
    attrs.push_back(prevalent_territory_cited(six_author_record(), g, aliases));
    Attribution unassigned;
    unassigned.pub_id = "nobody";
    unassigned.basis = AttributionBasis::AuthorFractional;
    unassigned.level = TerritoryLevel::Lau;
    unassigned.outcome = AttributionOutcome::Unassigned;
    attrs.push_back(unassigned);

    std::ostringstream out;
    write_attributions_csv(out, attrs);
    std::istringstream in(out.str());
    std::vector<Attribution> back = read_attributions_csv(in, "mem", g);

    REQUIRE(back.size() == 2);
    CHECK(back[0].pub_id == attrs[0].pub_id);
    CHECK(back[0].territory_id == "037006");
    CHECK(back[0].assigned());
    REQUIRE(back[0].territory != nullptr);
    CHECK(back[0].territory->name == "Bologna");
    CHECK_THAT(back[0].share.value(), Catch::Matchers::WithinAbs(5.0 / 12.0, 1e-9));
    CHECK(back[1].pub_id == "nobody");
    CHECK_FALSE(back[1].assigned());
}

TEST_CASE("reading an attribution against the wrong gazetteer fails loudly") {
    Gazetteer g = demo_gazetteer();
    std::istringstream in(
        "pub_id,level,territory_id,share,basis\n"
        "p1,lau,999999,0.5,author_fractional\n");
    CHECK_THROWS_AS(read_attributions_csv(in, "mem", g), DataError);
}
