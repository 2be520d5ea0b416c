#include <catch2/catch_amalgamated.hpp>

#include <citegrav/run_config.hpp>

using namespace citegrav;

TEST_CASE("config round-trips through its canonical JSON") {
    RunConfig a;
    a.inputs.cited = "x.jsonl";
    a.home = "DE";
    a.level = AnalysisLevel::International;
    a.partition = Partition::Continental;
    a.bands = {100.0, 500.0, 900.0};
    a.use_bands = true;
    a.zero_distance = ZeroDistancePolicy::parse("floor:1.5");
    a.seed = 99;
    a.cited_window = {2008, 2011};
    a.synth.n_territories = 42;
    a.synth.params.noise_sigma = 0.25;

    RunConfig b = RunConfig::from_json(nlohmann::json::parse(a.to_json().dump()), "mem");
    CHECK(b.inputs.cited == "x.jsonl");
    CHECK(b.home == "DE");
    CHECK(b.level == AnalysisLevel::International);
    CHECK(b.partition == Partition::Continental);
    CHECK(b.bands == std::vector<double>{100.0, 500.0, 900.0});
    CHECK(b.use_bands);
    CHECK(b.zero_distance.kind == ZeroDistancePolicy::Kind::Floor);
    CHECK(b.zero_distance.floor_km == 1.5);
    CHECK(b.seed == 99);
    CHECK(b.cited_window.first == 2008);
    CHECK(b.synth.n_territories == 42);
    CHECK(b.synth.params.noise_sigma == 0.25);
    CHECK(a.hash() == b.hash());
}

TEST_CASE("unknown keys are refused rather than ignored") {
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"levl":"national"})"), "mem"),
                    ConfigError);
    CHECK_THROWS_AS(
        RunConfig::from_json(nlohmann::json::parse(R"({"inputs":{"citedd":"x"}})"), "mem"),
        ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"([1,2])"), "mem"), ConfigError);
}

TEST_CASE("config hash identifies the analysis, not the output location") {
    RunConfig a;
    RunConfig b;
    b.out_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());

    RunConfig c;
    c.inputs.cited = "other.jsonl";
    CHECK(a.hash() != c.hash());
}

TEST_CASE("validation rejects inconsistent settings") {
    RunConfig c;
    c.home = "ITA";
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = RunConfig{};
    c.cited_window = {2012, 2010};
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = RunConfig{};
    c.bands = {400.0, 50.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("seed propagates into the synthetic options") {
    RunConfig c = RunConfig::from_json(nlohmann::json::parse(R"({"seed": 777})"), "mem");
    CHECK(c.seed == 777);
    CHECK(c.synth.seed == 777);
}

TEST_CASE("year windows read as a two-element array") {
    RunConfig c =
        RunConfig::from_json(nlohmann::json::parse(R"({"citing_window":[2011,2016]})"), "mem");
    CHECK(c.citing_window.first == 2011);
    CHECK(c.citing_window.last == 2016);
    CHECK(c.citing_window.contains(2011));
    CHECK(c.citing_window.contains(2016));
    CHECK_FALSE(c.citing_window.contains(2017));
    CHECK_THROWS_AS(
        RunConfig::from_json(nlohmann::json::parse(R"({"citing_window":[2011]})"), "mem"),
        ConfigError);
}
