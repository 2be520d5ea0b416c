// citegrav command-line driver. Subcommands run the pipeline stages
// independently on flat files: ingest -> flows -> fit, plus assign (single
// stages and the convention-agreement check), simulate (synthetic worlds with
// known parameters), and report (per-publication and per-territory tables).
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 estimation error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include <citegrav/citegrav.hpp>

namespace fs = std::filesystem;
using namespace citegrav;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + p.string() + "'");
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
    write_file(p, j.dump(2) + "\n");
}

CountryAliases load_aliases(const RunConfig& cfg) {
    require_input(cfg.inputs.aliases, "country alias CSV (--aliases)");
    std::ifstream in = open_input(cfg.inputs.aliases);
    return CountryAliases::from_csv(in, cfg.inputs.aliases);
}

Gazetteer load_gazetteer(const RunConfig& cfg, bool need_capitals) {
    require_input(cfg.inputs.gazetteer, "gazetteer CSV (--gazetteer)");
    std::ifstream in = open_input(cfg.inputs.gazetteer);
    Gazetteer g;
    g.load_territories_csv(in, cfg.inputs.gazetteer);
    if (!cfg.inputs.capitals.empty()) {
        require_input(cfg.inputs.capitals, "capitals CSV (--capitals)");
        std::ifstream caps = open_input(cfg.inputs.capitals);
        g.load_capitals_csv(caps, cfg.inputs.capitals);
    } else if (need_capitals) {
        throw ConfigError("missing input: capitals CSV (--capitals)");
    }
    return g;
}

ContinentMap load_continents(const RunConfig& cfg) {
    require_input(cfg.inputs.continents, "continents CSV (--continents)");
    std::ifstream in = open_input(cfg.inputs.continents);
    return ContinentMap::from_csv(in, cfg.inputs.continents);
}

LoadResult<CitedRecord> load_cited_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return load_cited(in, path);
}

LoadResult<CitingRecord> load_citing_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return load_citing(in, path);
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    return out;
}

std::string render_csv(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

// ---- attribution stages ---------------------------------------------------

struct CitedStage {
    std::vector<Attribution> attrs;
    IngestStats parse_stats;
    std::map<std::string, std::size_t> outcomes;
};

CitedStage run_cited_stage(const std::vector<CitedRecord>& records, const Gazetteer& g,
                           const CountryAliases& aliases) {
    CitedStage stage;
    stage.attrs.reserve(records.size());
    for (const CitedRecord& rec : records) {
        Attribution a = prevalent_territory_cited(rec, g, aliases, &stage.parse_stats);
        ++stage.outcomes[std::string(to_string(a.outcome))];
        stage.attrs.push_back(std::move(a));
    }
    return stage;
}

struct CitingStage {
    std::vector<Attribution> country;
    std::vector<Attribution> lau;
    IngestStats parse_stats;
    std::map<std::string, std::size_t> country_outcomes;
    std::map<std::string, std::size_t> lau_outcomes;
};

CitingStage run_citing_stage(const std::vector<CitingRecord>& records, const std::string& home,
                             const Gazetteer& g, const CountryAliases& aliases) {
    CitingStage stage;
    stage.country.reserve(records.size());
    stage.lau.reserve(records.size());
    for (const CitingRecord& rec : records) {
        Attribution c = prevalent_country_citing(rec, aliases, &stage.parse_stats);
        ++stage.country_outcomes[std::string(to_string(c.outcome))];
        Attribution l;
        if (c.assigned() && c.territory_id == home) {
            l = prevalent_lau_citing(rec, home, g, aliases);
            ++stage.lau_outcomes[std::string(to_string(l.outcome))];
        } else {
            l.pub_id = rec.pub_id;
            l.basis = AttributionBasis::AddressFrequency;
            l.level = TerritoryLevel::Lau;
            l.outcome = AttributionOutcome::Unassigned;
            ++stage.lau_outcomes[c.assigned() ? "prevalent country not home"
                                              : std::string(to_string(c.outcome))];
        }
        stage.country.push_back(std::move(c));
        stage.lau.push_back(std::move(l));
    }
    return stage;
}

nlohmann::ordered_json stats_json(const IngestStats& s) {
    nlohmann::ordered_json j;
    j["lines_total"] = s.lines_total;
    j["records_loaded"] = s.records_loaded;
    j["lines_skipped"] = s.lines_skipped;
    j["addresses_total"] = s.addresses_total;
    j["addresses_parsed"] = s.addresses_parsed;
    j["diagnostics"] = s.diagnostics;
    return j;
}

nlohmann::ordered_json outcomes_json(const std::map<std::string, std::size_t>& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

void write_record_drops(const fs::path& path,
                        const std::vector<std::pair<std::string, const std::map<std::string, std::size_t>*>>& stages) {
    std::ostringstream os;
    os << "stage,reason,records\n";
    for (const auto& [stage, outcomes] : stages)
        for (const auto& [reason, n] : *outcomes)
            if (reason != "assigned") os << csv_field(stage) << ',' << csv_field(reason) << ',' << n << '\n';
    write_file(path, os.str());
}

// ---- subcommands ----------------------------------------------------------

void cmd_ingest(const RunConfig& cfg) {
    require_input(cfg.inputs.cited, "cited records JSONL (--cited)");
    require_input(cfg.inputs.citing, "citing records JSONL (--citing)");
    CountryAliases aliases = load_aliases(cfg);
    Gazetteer g = load_gazetteer(cfg, /*need_capitals=*/false);

    LoadResult<CitedRecord> cited = load_cited_file(cfg.inputs.cited);
    LoadResult<CitingRecord> citing = load_citing_file(cfg.inputs.citing);
    CitedStage cs = run_cited_stage(cited.records, g, aliases);
    CitingStage zs = run_citing_stage(citing.records, cfg.home, g, aliases);

    fs::path out = ensure_out_dir(cfg);
    write_file(out / "attributions_cited.csv",
               render_csv([&](std::ostream& os) { write_attributions_csv(os, cs.attrs); }));
    write_file(out / "attributions_citing_country.csv",
               render_csv([&](std::ostream& os) { write_attributions_csv(os, zs.country); }));
    write_file(out / "attributions_citing_lau.csv",
               render_csv([&](std::ostream& os) { write_attributions_csv(os, zs.lau); }));
    write_record_drops(out / "ingest_drops.csv",
                       {{"cited", &cs.outcomes},
                        {"citing_country", &zs.country_outcomes},
                        {"citing_lau", &zs.lau_outcomes}});

    cited.stats.addresses_total = cs.parse_stats.addresses_total;
    cited.stats.addresses_parsed = cs.parse_stats.addresses_parsed;
    citing.stats.addresses_total = zs.parse_stats.addresses_total;
    citing.stats.addresses_parsed = zs.parse_stats.addresses_parsed;
    nlohmann::ordered_json stats;
    stats["config_hash"] = cfg.hash();
    stats["cited"] = stats_json(cited.stats);
    stats["cited"]["outcomes"] = outcomes_json(cs.outcomes);
    stats["citing"] = stats_json(citing.stats);
    stats["citing"]["country_outcomes"] = outcomes_json(zs.country_outcomes);
    stats["citing"]["lau_outcomes"] = outcomes_json(zs.lau_outcomes);
    write_json(out / "ingest_stats.json", stats);

    std::cout << "ingest: " << cited.stats.records_loaded << " cited and "
              << citing.stats.records_loaded << " citing records attributed; outputs in "
              << out.string() << "\n";
}

void cmd_assign(const RunConfig& cfg, bool agreement) {
    CountryAliases aliases = load_aliases(cfg);
    Gazetteer g = load_gazetteer(cfg, /*need_capitals=*/false);
    fs::path out = ensure_out_dir(cfg);

    if (agreement) {
        require_input(cfg.inputs.cited, "cited records JSONL (--cited)");
        require_input(cfg.inputs.citing, "citing records JSONL (--citing)");
        LoadResult<CitedRecord> cited = load_cited_file(cfg.inputs.cited);
        LoadResult<CitingRecord> citing = load_citing_file(cfg.inputs.citing);
        std::unordered_map<std::string, const CitingRecord*> by_id;
        for (const CitingRecord& r : citing.records) by_id.emplace(r.pub_id, &r);
        std::vector<PublicationViews> views;
        for (const CitedRecord& r : cited.records) {
            auto it = by_id.find(r.pub_id);
            if (it != by_id.end()) views.push_back(PublicationViews{&r, it->second});
        }
        double rate = convention_agreement(views, aliases, &g);
        nlohmann::ordered_json j;
        j["config_hash"] = cfg.hash();
        j["sample_size"] = views.size();
        j["agreement_rate"] = rate;
        write_json(out / "agreement.json", j);
        std::cout << "agreement: " << format_double(rate) << " over " << views.size()
                  << " publications\n";
        return;
    }

    if (cfg.inputs.cited.empty() && cfg.inputs.citing.empty())
        throw ConfigError("assign needs --cited and/or --citing records");
    if (!cfg.inputs.cited.empty()) {
        require_input(cfg.inputs.cited, "cited records JSONL (--cited)");
        LoadResult<CitedRecord> cited = load_cited_file(cfg.inputs.cited);
        CitedStage cs = run_cited_stage(cited.records, g, aliases);
        write_file(out / "attributions_cited.csv",
                   render_csv([&](std::ostream& os) { write_attributions_csv(os, cs.attrs); }));
        std::cout << "assign: " << cs.attrs.size() << " cited attributions\n";
    }
    if (!cfg.inputs.citing.empty()) {
        require_input(cfg.inputs.citing, "citing records JSONL (--citing)");
        LoadResult<CitingRecord> citing = load_citing_file(cfg.inputs.citing);
        CitingStage zs = run_citing_stage(citing.records, cfg.home, g, aliases);
        write_file(out / "attributions_citing_country.csv",
                   render_csv([&](std::ostream& os) { write_attributions_csv(os, zs.country); }));
        write_file(out / "attributions_citing_lau.csv",
                   render_csv([&](std::ostream& os) { write_attributions_csv(os, zs.lau); }));
        std::cout << "assign: " << zs.country.size() << " citing attributions\n";
    }
}

std::vector<Attribution> read_attribution_file(const fs::path& path, const Gazetteer& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_attributions_csv(in, path.string(), g);
}

void cmd_flows(const RunConfig& cfg) {
    require_input(cfg.inputs.cited, "cited records JSONL (--cited)");
    require_input(cfg.inputs.citing, "citing records JSONL (--citing)");
    const bool international = cfg.level == AnalysisLevel::International;
    Gazetteer g = load_gazetteer(cfg, /*need_capitals=*/international);
    fs::path out = ensure_out_dir(cfg);

    LoadResult<CitedRecord> cited = load_cited_file(cfg.inputs.cited);
    LoadResult<CitingRecord> citing = load_citing_file(cfg.inputs.citing);
    std::vector<Attribution> cited_attrs = read_attribution_file(out / "attributions_cited.csv", g);
    std::vector<Attribution> citing_attrs = read_attribution_file(
        out / (international ? "attributions_citing_country.csv" : "attributions_citing_lau.csv"),
        g);

    std::optional<ContinentMap> continents;
    if (international && cfg.partition != Partition::All) continents = load_continents(cfg);

    FlowOptions opt;
    opt.level = cfg.level;
    opt.partition = cfg.partition;
    opt.home = cfg.home;
    opt.cited_window = cfg.cited_window;
    opt.citing_window = cfg.citing_window;

    YearMap cited_years = year_map(cited.records);
    FlowResult flows = build_flow_edges(cited_attrs, citing_attrs, citing.records, cited_years,
                                        opt, g, continents ? &*continents : nullptr);

    MassTable cited_masses = compute_masses(cited_attrs, cited_years, cfg.cited_window);
    YearMap citing_years = year_map(citing.records);
    MassTable citing_masses = compute_masses(citing_attrs, citing_years, cfg.citing_window);

    std::string level = std::string(to_string(cfg.level));
    write_file(out / ("edges_" + level + ".csv"), render_csv([&](std::ostream& os) {
                   write_edges_csv(os, cfg.level, flows.edges);
               }));
    write_file(out / "masses_cited.csv",
               render_csv([&](std::ostream& os) { write_masses_csv(os, cited_masses); }));
    write_file(out / ("masses_citing_" + level + ".csv"),
               render_csv([&](std::ostream& os) { write_masses_csv(os, citing_masses); }));
    write_file(out / ("flow_drops_" + level + ".csv"),
               render_csv([&](std::ostream& os) { write_drop_ledger_csv(os, flows.dropped); }));

    double counted = 0.0;
    for (const FlowEdge& e : flows.edges) counted += e.citations;
    bool conserved =
        static_cast<std::size_t>(counted) + flows.dropped.total() == flows.total_pairs;
    nlohmann::ordered_json summary;
    summary["config_hash"] = cfg.hash();
    summary["level"] = level;
    summary["partition"] = std::string(to_string(cfg.partition));
    summary["total_pairs"] = flows.total_pairs;
    summary["counted_pairs"] = static_cast<std::size_t>(counted);
    summary["dropped_pairs"] = flows.dropped.total();
    summary["conserved"] = conserved;
    summary["edges"] = flows.edges.size();
    nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
    for (const auto& [reason, n] : flows.dropped.reasons) reasons[reason] = n;
    summary["dropped"] = std::move(reasons);
    write_json(out / ("flows_summary_" + level + ".json"), summary);

    std::cout << "flows: " << flows.edges.size() << " edges, "
              << static_cast<std::size_t>(counted) << " of " << flows.total_pairs
              << " citation pairs counted (" << (conserved ? "conserved" : "NOT CONSERVED")
              << ")\n";
}

struct FitInputs {
    std::vector<FlowEdge> edges;
    MassTable cited_masses;
    MassTable citing_masses;
};

FitInputs load_fit_inputs(const RunConfig& cfg, const fs::path& out) {
    std::string level = std::string(to_string(cfg.level));
    fs::path edges_path = cfg.inputs.edges.empty() ? out / ("edges_" + level + ".csv")
                                                   : fs::path(cfg.inputs.edges);
    fs::path mi_path = cfg.inputs.masses_cited.empty() ? out / "masses_cited.csv"
                                                       : fs::path(cfg.inputs.masses_cited);
    fs::path mj_path = cfg.inputs.masses_citing.empty()
                           ? out / ("masses_citing_" + level + ".csv")
                           : fs::path(cfg.inputs.masses_citing);
    require_input(edges_path.string(), "edges CSV (--edges or a prior flows/simulate run)");
    require_input(mi_path.string(), "cited masses CSV (--masses-cited)");
    require_input(mj_path.string(), "citing masses CSV (--masses-citing)");

    FitInputs in;
    {
        std::ifstream s = open_input(edges_path.string());
        for (LeveledEdge& e : read_edges_csv(s, edges_path.string()))
            if (e.level == cfg.level) in.edges.push_back(std::move(e.edge));
    }
    {
        std::ifstream s = open_input(mi_path.string());
        in.cited_masses = read_masses_csv(s, mi_path.string());
    }
    {
        std::ifstream s = open_input(mj_path.string());
        in.citing_masses = read_masses_csv(s, mj_path.string());
    }
    return in;
}

std::vector<FlowEdge> filter_partition(const std::vector<FlowEdge>& edges, Partition want,
                                       const ContinentMap& continents, const std::string& home) {
    auto home_continent = continents.continent(home);
    if (!home_continent) throw DataError("no continent for home country '" + home + "'");
    std::vector<FlowEdge> out;
    for (const FlowEdge& e : edges) {
        auto c = continents.continent(e.citing_id);
        if (!c) throw DataError("no continent for country '" + e.citing_id + "'");
        bool continental = *c == *home_continent;
        if (continental == (want == Partition::Continental)) out.push_back(e);
    }
    return out;
}

void emit_fit(const RunConfig& cfg, const fs::path& out, const std::vector<FlowEdge>& edges,
              const MassTable& mi, const MassTable& mj, const std::string& tag) {
    std::string stem = "fit_" + tag;
    std::string title = "Gravity fit, " + tag;
    if (edges.empty()) {
        nlohmann::ordered_json j;
        j["config_hash"] = cfg.hash();
        j["level"] = std::string(to_string(cfg.level));
        j["notice"] = "no " + tag + " observations";
        j["n_obs"] = 0;
        write_json(out / (stem + ".json"), j);
        write_file(out / (stem + ".txt"), title + ": no observations\n");
        std::cout << stem << ": no observations\n";
        return;
    }
    DesignOptions opt;
    opt.bands = cfg.use_bands;
    opt.band_spec.breakpoints = cfg.bands;
    opt.zero_distance = cfg.zero_distance;
    DesignMatrix design = build_design(edges, mi, mj, opt);
    GravityFit fit = ols_fit(design);
    nlohmann::ordered_json j = fit_report_json(fit);
    j["config_hash"] = cfg.hash();
    j["level"] = std::string(to_string(cfg.level));
    write_json(out / (stem + ".json"), j);
    write_file(out / (stem + ".txt"), fit_report_text(fit, title));
    std::cout << stem << ": n_obs " << fit.n_obs << ", R^2 " << format_double(fit.r2) << "\n";
}

void cmd_fit(const RunConfig& cfg, bool split_partitions) {
    fs::path out = ensure_out_dir(cfg);
    FitInputs in = load_fit_inputs(cfg, out);
    std::string level = std::string(to_string(cfg.level));

    if (cfg.level == AnalysisLevel::National || cfg.partition == Partition::All) {
        if (!split_partitions) {
            emit_fit(cfg, out, in.edges, in.cited_masses, in.citing_masses, level);
            return;
        }
        if (cfg.level == AnalysisLevel::National)
            throw ConfigError("--split applies to the international level");
    }

    ContinentMap continents = load_continents(cfg);
    if (split_partitions) {
        for (Partition p : {Partition::Continental, Partition::Intercontinental}) {
            std::vector<FlowEdge> part = filter_partition(in.edges, p, continents, cfg.home);
            emit_fit(cfg, out, part, in.cited_masses, in.citing_masses,
                     level + "_" + std::string(to_string(p)));
        }
        return;
    }
    std::vector<FlowEdge> part = filter_partition(in.edges, cfg.partition, continents, cfg.home);
    emit_fit(cfg, out, part, in.cited_masses, in.citing_masses,
             level + "_" + std::string(to_string(cfg.partition)));
}

void cmd_simulate(const RunConfig& cfg) {
    SyntheticWorld world = generate_world(cfg.synth);
    fs::path out = ensure_out_dir(cfg);
    write_file(out / "synthetic_gazetteer.csv",
               render_csv([&](std::ostream& os) { write_world_gazetteer_csv(os, world); }));
    write_file(out / "edges_national.csv", render_csv([&](std::ostream& os) {
                   write_edges_csv(os, AnalysisLevel::National, world.edges);
               }));
    write_file(out / "masses_cited.csv",
               render_csv([&](std::ostream& os) { write_masses_csv(os, world.masses); }));
    write_file(out / "masses_citing_national.csv",
               render_csv([&](std::ostream& os) { write_masses_csv(os, world.masses); }));
    write_file(out / "synth_drops.csv",
               render_csv([&](std::ostream& os) { write_drop_ledger_csv(os, world.dropped); }));

    RecoveryResult rec = recover_from(world, cfg.synth);
    nlohmann::ordered_json truth, fitted, deltas;
    truth["ln_k"] = cfg.synth.params.ln_k;
    truth["alpha"] = cfg.synth.params.alpha;
    truth["beta"] = cfg.synth.params.beta;
    truth["gamma"] = cfg.synth.params.gamma;
    truth["noise_sigma"] = cfg.synth.params.noise_sigma;
    fitted["ln_k"] = rec.fit.coef_of(kConstCol);
    fitted["alpha"] = rec.fit.coef_of(kMiCol);
    fitted["beta"] = rec.fit.coef_of(kMjCol);
    fitted["gamma"] = -rec.fit.coef_of(kDistCol);
    deltas["ln_k"] = rec.d_ln_k;
    deltas["alpha"] = rec.d_alpha;
    deltas["beta"] = rec.d_beta;
    deltas["gamma"] = rec.d_gamma;
    nlohmann::ordered_json j;
    j["config_hash"] = cfg.hash();
    j["n_territories"] = cfg.synth.n_territories;
    j["seed"] = cfg.synth.seed;
    j["count_mode"] = std::string(to_string(cfg.synth.count_mode));
    j["truth"] = std::move(truth);
    j["fitted"] = std::move(fitted);
    j["deltas"] = std::move(deltas);
    j["r2"] = rec.fit.r2;
    j["n_obs"] = rec.fit.n_obs;
    j["total_pairs"] = world.total_pairs;
    j["edges"] = world.edges.size();
    j["conserved"] = world.conserved();
    nlohmann::ordered_json drops = nlohmann::ordered_json::object();
    for (const auto& [reason, n] : world.dropped.reasons) drops[reason] = n;
    j["dropped"] = std::move(drops);
    write_json(out / "recovery.json", j);

    std::cout << "simulate: " << world.edges.size() << " edges from "
              << cfg.synth.n_territories << " territories; gamma delta "
              << format_double(rec.d_gamma) << "\n";
}

std::string percent(double fraction) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << fraction * 100.0 << "%";
    return os.str();
}

std::string fixed1(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << v;
    return os.str();
}

void cmd_report(const RunConfig& cfg) {
    require_input(cfg.inputs.cited, "cited records JSONL (--cited)");
    require_input(cfg.inputs.citing, "citing records JSONL (--citing)");
    Gazetteer g = load_gazetteer(cfg, /*need_capitals=*/true);
    fs::path out = ensure_out_dir(cfg);

    LoadResult<CitedRecord> cited = load_cited_file(cfg.inputs.cited);
    LoadResult<CitingRecord> citing = load_citing_file(cfg.inputs.citing);
    std::vector<Attribution> cited_attrs = read_attribution_file(out / "attributions_cited.csv", g);
    std::vector<Attribution> citing_lau =
        read_attribution_file(out / "attributions_citing_lau.csv", g);
    std::vector<Attribution> citing_country =
        read_attribution_file(out / "attributions_citing_country.csv", g);
    YearMap cited_years = year_map(cited.records);

    FlowOptions nat;
    nat.level = AnalysisLevel::National;
    nat.home = cfg.home;
    nat.cited_window = cfg.cited_window;
    nat.citing_window = cfg.citing_window;
    PairResult national =
        build_citation_pairs(cited_attrs, citing_lau, citing.records, cited_years, nat, g);
    FlowOptions intl = nat;
    intl.level = AnalysisLevel::International;
    PairResult international =
        build_citation_pairs(cited_attrs, citing_country, citing.records, cited_years, intl, g);

    std::vector<PublicationReportRow> pubs = all_publication_rows(national, international);
    std::vector<TerritoryReportRow> terrs = all_territory_rows(national, international, g);

    {
        std::ostringstream os;
        os << "pub_id,intl_citations,intl_avg_km,foreign_citations,foreign_avg_km,"
              "natl_citations,natl_avg_km\n";
        for (const PublicationReportRow& r : pubs)
            os << csv_field(r.pub_id) << ',' << r.intl_citations << ','
               << format_double(r.intl_avg_km) << ',' << r.foreign_citations << ','
               << format_double(r.foreign_avg_km) << ',' << r.natl_citations << ','
               << format_double(r.natl_avg_km) << '\n';
        write_file(out / "publication_report.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "territory_id,name,cited_pubs,intl_citations,intl_avg_km,foreign_citations,"
              "foreign_avg_km,natl_citations,natl_avg_km,local_only_share\n";
        for (const TerritoryReportRow& r : terrs)
            os << csv_field(r.territory_id) << ',' << csv_field(r.name) << ',' << r.cited_pubs
               << ',' << r.intl_citations << ',' << format_double(r.intl_avg_km) << ','
               << r.foreign_citations << ',' << format_double(r.foreign_avg_km) << ','
               << r.natl_citations << ',' << format_double(r.natl_avg_km) << ','
               << format_double(r.local_only_share) << '\n';
        write_file(out / "territory_report.csv", os.str());
    }
    {
        std::ostringstream os;
        os << std::left << std::setw(24) << "Publication" << std::right << std::setw(12)
           << "Intl cites*" << std::setw(14) << "Avg dist km" << std::setw(12) << "Natl cites**"
           << std::setw(14) << "Avg dist km" << '\n';
        for (const PublicationReportRow& r : pubs)
            os << std::left << std::setw(24) << r.pub_id << std::right << std::setw(12)
               << r.intl_citations << std::setw(14) << fixed1(r.intl_avg_km) << std::setw(12)
               << r.natl_citations << std::setw(14) << fixed1(r.natl_avg_km) << '\n';
        os << "*  every resolvable citing publication; home-country ones enter at their LAU "
              "distance\n";
        os << "** home-country citing publications only\n";
        write_file(out / "publication_report.txt", os.str());
    }
    {
        std::ostringstream os;
        os << std::left << std::setw(12) << "Territory" << std::setw(16) << "Name" << std::right
           << std::setw(12) << "Cited pubs" << std::setw(13) << "Intl cites*" << std::setw(14)
           << "Avg dist km" << std::setw(13) << "Natl cites**" << std::setw(14) << "Avg dist km"
           << std::setw(13) << "Local only" << '\n';
        for (const TerritoryReportRow& r : terrs)
            os << std::left << std::setw(12) << r.territory_id << std::setw(16) << r.name
               << std::right << std::setw(12) << r.cited_pubs << std::setw(13) << r.intl_citations
               << std::setw(14) << fixed1(r.intl_avg_km) << std::setw(13) << r.natl_citations
               << std::setw(14) << fixed1(r.natl_avg_km) << std::setw(13)
               << percent(r.local_only_share) << '\n';
        os << "*  every resolvable citing publication; home-country ones enter at their LAU "
              "distance\n";
        os << "** home-country citing publications only\n";
        os << "Local only: share of the territory's cited publications cited exclusively from "
              "itself\n";
        write_file(out / "territory_report.txt", os.str());
    }

    std::cout << "report: " << pubs.size() << " publications, " << terrs.size()
              << " territories\n";
}

// ---- option wiring ---------------------------------------------------------

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> cited, citing, gazetteer, capitals, aliases, continents;
    std::optional<std::string> edges, masses_cited, masses_citing;
    std::optional<std::string> home, level, partition, zero_distance, out_dir, count_mode;
    std::optional<std::uint64_t> seed;
    std::vector<double> bands;
    std::optional<std::size_t> territories;
    std::optional<double> noise, alpha, beta, gamma, ln_k, mass_median, mass_sigma_log;
    std::optional<std::pair<int, int>> cited_window, citing_window;
};

std::pair<int, int> parse_window(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos)
        throw ConfigError("window must be FIRST:LAST, got '" + s + "'");
    try {
        return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("window must be FIRST:LAST, got '" + s + "'");
    }
}

RunConfig resolve(const Overrides& ov) {
    RunConfig cfg = ov.config ? RunConfig::from_file(*ov.config) : RunConfig{};
    auto set = [](auto& slot, const auto& opt) {
        if (opt) slot = *opt;
    };
    set(cfg.inputs.cited, ov.cited);
    set(cfg.inputs.citing, ov.citing);
    set(cfg.inputs.gazetteer, ov.gazetteer);
    set(cfg.inputs.capitals, ov.capitals);
    set(cfg.inputs.aliases, ov.aliases);
    set(cfg.inputs.continents, ov.continents);
    set(cfg.inputs.edges, ov.edges);
    set(cfg.inputs.masses_cited, ov.masses_cited);
    set(cfg.inputs.masses_citing, ov.masses_citing);
    set(cfg.home, ov.home);
    set(cfg.out_dir, ov.out_dir);
    if (ov.level) cfg.level = parse_level(*ov.level);
    if (ov.partition) cfg.partition = parse_partition(*ov.partition);
    if (ov.zero_distance) cfg.zero_distance = ZeroDistancePolicy::parse(*ov.zero_distance);
    if (!ov.bands.empty()) {
        cfg.bands = ov.bands;
        cfg.use_bands = true;
    }
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.synth.seed = *ov.seed;
    }
    if (ov.cited_window)
        cfg.cited_window = YearWindow{ov.cited_window->first, ov.cited_window->second};
    if (ov.citing_window)
        cfg.citing_window = YearWindow{ov.citing_window->first, ov.citing_window->second};
    if (ov.territories) cfg.synth.n_territories = *ov.territories;
    if (ov.count_mode) cfg.synth.count_mode = parse_count_mode(*ov.count_mode);
    set(cfg.synth.params.noise_sigma, ov.noise);
    set(cfg.synth.params.alpha, ov.alpha);
    set(cfg.synth.params.beta, ov.beta);
    set(cfg.synth.params.gamma, ov.gamma);
    set(cfg.synth.params.ln_k, ov.ln_k);
    set(cfg.synth.mass_median, ov.mass_median);
    set(cfg.synth.mass_sigma_log, ov.mass_sigma_log);
    cfg.validate();
    return cfg;
}

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config, "JSON config file; flags override its values");
    cmd->add_option("--out", ov.out_dir, "output directory (default 'out')");
    cmd->add_option("--home", ov.home, "home country ISO alpha-2 code (default IT)");
    cmd->add_option("--seed", ov.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"territory citation flows and gravity-model estimation"};
    app.require_subcommand(1);
    Overrides ov;
    std::string cited_window_arg, citing_window_arg;
    bool agreement = false;
    bool split = false;

    auto add_windows = [&](CLI::App* cmd) {
        cmd->add_option("--cited-window", cited_window_arg, "cited year window FIRST:LAST");
        cmd->add_option("--citing-window", citing_window_arg, "citing year window FIRST:LAST");
    };
    auto add_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--cited", ov.cited, "cited records JSONL");
        cmd->add_option("--citing", ov.citing, "citing records JSONL");
        cmd->add_option("--gazetteer", ov.gazetteer,
                        "gazetteer CSV (id,level,name,country_code,lat,lon)");
        cmd->add_option("--capitals", ov.capitals, "capitals CSV (country_code,name,lat,lon)");
        cmd->add_option("--aliases", ov.aliases, "country aliases CSV (alias,iso2)");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "parse records and attribute territories");
    add_common_options(ingest, ov);
    add_inputs(ingest);

    CLI::App* assign = app.add_subcommand("assign", "attribute one side, or check convention agreement");
    add_common_options(assign, ov);
    add_inputs(assign);
    assign->add_flag("--agreement", agreement,
                     "report how often the two conventions pick the same country");

    CLI::App* flows = app.add_subcommand("flows", "aggregate attributed citations into flow edges");
    add_common_options(flows, ov);
    add_inputs(flows);
    flows->add_option("--continents", ov.continents, "continents CSV (country_code,continent)");
    flows->add_option("--level", ov.level, "analysis level: national or international");
    flows->add_option("--partition", ov.partition, "all, continental, or intercontinental");
    add_windows(flows);

    CLI::App* fit = app.add_subcommand("fit", "estimate the gravity model on flow edges");
    add_common_options(fit, ov);
    fit->add_option("--level", ov.level, "analysis level: national or international");
    fit->add_option("--partition", ov.partition, "all, continental, or intercontinental");
    fit->add_flag("--split", split, "fit continental and intercontinental sides separately");
    fit->add_option("--continents", ov.continents, "continents CSV (country_code,continent)");
    fit->add_option("--bands", ov.bands, "distance band breakpoints in km; enables the band specification")
        ->delimiter(',');
    fit->add_option("--zero-distance", ov.zero_distance,
                    "policy for zero distances: exclude or floor:<km>");
    fit->add_option("--edges", ov.edges, "edges CSV (default <out>/edges_<level>.csv)");
    fit->add_option("--masses-cited", ov.masses_cited, "cited masses CSV");
    fit->add_option("--masses-citing", ov.masses_citing, "citing masses CSV");

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic world and check recovery");
    add_common_options(simulate, ov);
    simulate->add_option("--territories", ov.territories, "number of territories");
    simulate->add_option("--noise", ov.noise, "lognormal noise sigma on counts");
    simulate->add_option("--alpha", ov.alpha, "cited mass elasticity");
    simulate->add_option("--beta", ov.beta, "citing mass elasticity");
    simulate->add_option("--gamma", ov.gamma, "distance decay");
    simulate->add_option("--ln-k", ov.ln_k, "log constant");
    simulate->add_option("--count-mode", ov.count_mode, "rounded, continuous, or poisson");
    simulate->add_option("--mass-median", ov.mass_median, "median territory mass");
    simulate->add_option("--mass-sigma-log", ov.mass_sigma_log, "log sd of territory masses");

    CLI::App* report = app.add_subcommand("report", "per-publication and per-territory flow tables");
    add_common_options(report, ov);
    add_inputs(report);
    add_windows(report);

    try {
        app.parse(argc, argv);
        if (!cited_window_arg.empty()) ov.cited_window = parse_window(cited_window_arg);
        if (!citing_window_arg.empty()) ov.citing_window = parse_window(citing_window_arg);
        RunConfig cfg = resolve(ov);
        if (ingest->parsed()) cmd_ingest(cfg);
        else if (assign->parsed()) cmd_assign(cfg, agreement);
        else if (flows->parsed()) cmd_flows(cfg);
        else if (fit->parsed()) cmd_fit(cfg, split);
        else if (simulate->parsed()) cmd_simulate(cfg);
        else if (report->parsed()) cmd_report(cfg);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
