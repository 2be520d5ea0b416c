#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citegrav/error.hpp"
#include "citegrav/flows.hpp"
#include "citegrav/gravity.hpp"
#include "citegrav/synth.hpp"

namespace citegrav {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Resolved run configuration: one JSON file, overridable flag by flag on the
// command line. Every report embeds hash() so outputs are traceable to the
// exact configuration that produced them.
struct RunConfig {
    struct Inputs {
        std::string cited;
        std::string citing;
        std::string gazetteer;
        std::string capitals;
        std::string aliases;
        std::string continents;
        std::string edges;          // fit: override the conventional edges file
        std::string masses_cited;   // fit: ditto
        std::string masses_citing;  // fit: ditto
    };

    Inputs inputs;
    std::string home = "IT";
    AnalysisLevel level = AnalysisLevel::National;
    Partition partition = Partition::All;
    std::vector<double> bands{50.0, 400.0, 800.0, 1200.0};
    bool use_bands = false;
    ZeroDistancePolicy zero_distance;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    YearWindow cited_window{2010, 2012};
    YearWindow citing_window{2010, 2017};
    SynthOptions synth;

    void validate() const {
        BandSpec spec;
        spec.breakpoints = bands;
        spec.validate();
        if (home.size() != 2) throw ConfigError("home must be an ISO alpha-2 code");
        if (cited_window.first > cited_window.last || citing_window.first > citing_window.last)
            throw ConfigError("year window is inverted");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json in;
        in["cited"] = inputs.cited;
        in["citing"] = inputs.citing;
        in["gazetteer"] = inputs.gazetteer;
        in["capitals"] = inputs.capitals;
        in["aliases"] = inputs.aliases;
        in["continents"] = inputs.continents;
        in["edges"] = inputs.edges;
        in["masses_cited"] = inputs.masses_cited;
        in["masses_citing"] = inputs.masses_citing;
        nlohmann::ordered_json synth_j;
        synth_j["n_territories"] = synth.n_territories;
        synth_j["ln_k"] = synth.params.ln_k;
        synth_j["alpha"] = synth.params.alpha;
        synth_j["beta"] = synth.params.beta;
        synth_j["gamma"] = synth.params.gamma;
        synth_j["noise_sigma"] = synth.params.noise_sigma;
        synth_j["count_mode"] = std::string(to_string(synth.count_mode));
        synth_j["mass_median"] = synth.mass_median;
        synth_j["mass_sigma_log"] = synth.mass_sigma_log;
        synth_j["box"] = {synth.lat_min, synth.lat_max, synth.lon_min, synth.lon_max};
        nlohmann::ordered_json j;
        j["inputs"] = std::move(in);
        j["home"] = home;
        j["level"] = std::string(to_string(level));
        j["partition"] = std::string(to_string(partition));
        j["bands"] = bands;
        j["use_bands"] = use_bands;
        j["zero_distance"] = zero_distance.describe();
        j["out"] = out_dir;
        j["seed"] = seed;
        j["cited_window"] = {cited_window.first, cited_window.last};
        j["citing_window"] = {citing_window.first, citing_window.last};
        j["synth"] = std::move(synth_j);
        return j;
    }

    // FNV-1a over the canonical serialization. The output directory is
    // dropped first: it changes where results land, never what they are.
    std::string hash() const {
        nlohmann::ordered_json j = to_json();
        j.erase("out");
        return "fnv1a64:" + hex64(fnv1a64(j.dump()));
    }

    static RunConfig from_json(const nlohmann::json& j, const std::string& source) {
        if (!j.is_object()) throw ConfigError(source + ": config must be a JSON object");
        RunConfig c;
        for (const auto& [key, value] : j.items()) {
            if (key == "inputs") {
                if (!value.is_object()) throw ConfigError(source + ": inputs must be an object");
                for (const auto& [ikey, ival] : value.items()) {
                    std::string* slot = nullptr;
                    if (ikey == "cited") slot = &c.inputs.cited;
                    else if (ikey == "citing") slot = &c.inputs.citing;
                    else if (ikey == "gazetteer") slot = &c.inputs.gazetteer;
                    else if (ikey == "capitals") slot = &c.inputs.capitals;
                    else if (ikey == "aliases") slot = &c.inputs.aliases;
                    else if (ikey == "continents") slot = &c.inputs.continents;
                    else if (ikey == "edges") slot = &c.inputs.edges;
                    else if (ikey == "masses_cited") slot = &c.inputs.masses_cited;
                    else if (ikey == "masses_citing") slot = &c.inputs.masses_citing;
                    else throw ConfigError(source + ": unknown input key '" + ikey + "'");
                    if (!ival.is_string())
                        throw ConfigError(source + ": input '" + ikey + "' must be a string");
                    *slot = ival.get<std::string>();
                }
            } else if (key == "home") {
                c.home = expect_string(value, source, key);
            } else if (key == "level") {
                c.level = parse_level(expect_string(value, source, key));
            } else if (key == "partition") {
                c.partition = parse_partition(expect_string(value, source, key));
            } else if (key == "bands") {
                c.bands = expect_doubles(value, source, key);
            } else if (key == "use_bands") {
                if (!value.is_boolean())
                    throw ConfigError(source + ": use_bands must be a boolean");
                c.use_bands = value.get<bool>();
            } else if (key == "zero_distance") {
                c.zero_distance = ZeroDistancePolicy::parse(expect_string(value, source, key));
            } else if (key == "out") {
                c.out_dir = expect_string(value, source, key);
            } else if (key == "seed") {
                if (!value.is_number_unsigned() && !value.is_number_integer())
                    throw ConfigError(source + ": seed must be an integer");
                c.seed = value.get<std::uint64_t>();
            } else if (key == "cited_window") {
                c.cited_window = expect_window(value, source, key);
            } else if (key == "citing_window") {
                c.citing_window = expect_window(value, source, key);
            } else if (key == "synth") {
                parse_synth(value, source, c.synth);
            } else {
                throw ConfigError(source + ": unknown config key '" + key + "'");
            }
        }
        c.synth.seed = c.seed;
        c.validate();
        return c;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
        return from_json(j, path);
    }

  private:
    static std::string expect_string(const nlohmann::json& v, const std::string& source,
                                     const std::string& key) {
        if (!v.is_string()) throw ConfigError(source + ": " + key + " must be a string");
        return v.get<std::string>();
    }

    static std::vector<double> expect_doubles(const nlohmann::json& v, const std::string& source,
                                              const std::string& key) {
        if (!v.is_array()) throw ConfigError(source + ": " + key + " must be an array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(source + ": " + key + " must hold numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    static YearWindow expect_window(const nlohmann::json& v, const std::string& source,
                                    const std::string& key) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
            !v[1].is_number_integer())
            throw ConfigError(source + ": " + key + " must be [first_year, last_year]");
        return YearWindow{v[0].get<int>(), v[1].get<int>()};
    }

    static void parse_synth(const nlohmann::json& v, const std::string& source,
                            SynthOptions& synth) {
        if (!v.is_object()) throw ConfigError(source + ": synth must be an object");
        for (const auto& [key, value] : v.items()) {
            if (key == "n_territories") {
                if (!value.is_number_integer() || value.get<long long>() < 0)
                    throw ConfigError(source + ": synth.n_territories must be a nonnegative integer");
                synth.n_territories = value.get<std::size_t>();
            } else if (key == "ln_k" || key == "alpha" || key == "beta" || key == "gamma" ||
                       key == "noise_sigma" || key == "mass_median" || key == "mass_sigma_log") {
                if (!value.is_number())
                    throw ConfigError(source + ": synth." + key + " must be a number");
                double d = value.get<double>();
                if (key == "ln_k") synth.params.ln_k = d;
                else if (key == "alpha") synth.params.alpha = d;
                else if (key == "beta") synth.params.beta = d;
                else if (key == "gamma") synth.params.gamma = d;
                else if (key == "noise_sigma") synth.params.noise_sigma = d;
                else if (key == "mass_median") synth.mass_median = d;
                else synth.mass_sigma_log = d;
            } else if (key == "count_mode") {
                synth.count_mode = parse_count_mode(expect_string(value, source, "synth.count_mode"));
            } else if (key == "box") {
                std::vector<double> box = expect_doubles(value, source, "synth.box");
                if (box.size() != 4)
                    throw ConfigError(source +
                                      ": synth.box must be [lat_min, lat_max, lon_min, lon_max]");
                synth.lat_min = box[0];
                synth.lat_max = box[1];
                synth.lon_min = box[2];
                synth.lon_max = box[3];
            } else {
                throw ConfigError(source + ": unknown synth key '" + key + "'");
            }
        }
    }
};

inline void require_input(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError("missing input: " + what);
    if (!std::filesystem::exists(path))
        throw ConfigError("input file not found: " + path + " (" + what + ")");
}

}  // namespace citegrav
