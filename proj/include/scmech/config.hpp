#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include "scmech/io.hpp"

namespace scmech {

/// Parsed run configuration: family/distribution/mixture blocks, the command
/// block, solver options, output directory and the master seed.
struct RunConfig {
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<PreferenceFamily> family;
    std::optional<TypeDistribution> distribution;
    std::optional<SliceMixture> mixture;
    json command;        // raw command block, validated by the dispatcher
    SolveOptions solver;
    bool quiet = false;
};

inline Result<RunConfig> parse_config(const json& j) {
    auto bad = [](std::string m) { return fail<RunConfig>(Errc::config_invalid, m); };
    if (!j.is_object()) return bad("config must be a JSON object");
    RunConfig cfg;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            return bad("seed must be an integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("family")) {
        auto fam = family_from_json(j["family"]);
        if (!fam.ok()) return fam.error();
        cfg.family = *fam;
    }
    if (j.contains("distribution")) {
        auto dist = dist_from_json(j["distribution"]);
        if (!dist.ok()) return dist.error();
        cfg.distribution = *dist;
    }
    if (j.contains("mixture")) {
        const json& mj = j["mixture"];
        if (!mj.is_object() || !mj.contains("slices") || !mj["slices"].is_array()) {
            return bad("mixture.slices must be an array");
        }
        std::vector<Slice> slices;
        for (const json& sj : mj["slices"]) {
            auto fam = family_from_json(sj.contains("family") ? sj["family"] : json());
            if (!fam.ok()) return fam.error();
            auto dist = dist_from_json(sj.contains("distribution") ? sj["distribution"] : json());
            if (!dist.ok()) return dist.error();
            if (!sj.contains("weight")) return bad("mixture slice weight missing");
            slices.push_back(Slice{*fam, *dist, sj["weight"].get<double>()});
        }
        auto mix = SliceMixture::make(std::move(slices));
        if (!mix.ok()) return mix.error();
        cfg.mixture = *mix;
    }
    if (!j.contains("command") || !j["command"].is_object() || !j["command"].contains("name")) {
        return bad("command block with a name is required");
    }
    cfg.command = j["command"];
    if (j.contains("solver")) {
        const json& s = j["solver"];
        if (s.contains("starts")) cfg.solver.starts = s["starts"].get<int>();
        if (s.contains("refine_budget")) cfg.solver.refine_budget = s["refine_budget"].get<int>();
        if (s.contains("verify_grid")) cfg.solver.verify_grid = s["verify_grid"].get<int>();
        if (s.contains("coarse_points")) cfg.solver.coarse_points = s["coarse_points"].get<int>();
        if (s.contains("oracle")) cfg.solver.oracle_compare = s["oracle"].get<bool>();
        if (s.contains("oracle_theta_grid")) {
            cfg.solver.oracle_grid.theta_points = s["oracle_theta_grid"].get<int>();
        }
        if (s.contains("oracle_q_grid")) {
            cfg.solver.oracle_grid.q_points = s["oracle_q_grid"].get<int>();
        }
    }
    if (cfg.seed) cfg.solver.seed = *cfg.seed;
    return cfg;
}

inline Result<RunConfig> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return fail<RunConfig>(Errc::config_invalid, "cannot open config file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        return fail<RunConfig>(Errc::config_invalid,
                               "config parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

/// Output directory resolution: flag > config > environment > current dir.
inline std::string resolve_out_dir(const std::string& flag_value, const RunConfig& cfg) {
    if (!flag_value.empty()) return flag_value;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("SCMECH_OUT_DIR")) return env;
    return ".";
}

}  // namespace scmech
