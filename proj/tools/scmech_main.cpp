#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scmech/cli.hpp"

using namespace scmech;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int grid = 0;
    bool oracle = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "path to the run config (JSON)")->required();
    cmd->add_option("--out", flags.out_dir, "output directory for artifacts");
    cmd->add_option("--seed", flags.seed, "master seed (overrides the config)")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--grid", flags.grid, "verification grid size override");
    cmd->add_flag("--oracle", flags.oracle, "also run the brute-force grid oracle");
    cmd->add_flag("--quiet", flags.quiet, "suppress the human-readable summary");
}

int run_with_config(const CommonFlags& flags, const std::string& forced_command) {
    auto cfg = parse_config_file(flags.config_path);
    if (!cfg.ok()) {
        std::cerr << "config error: " << cfg.error().message << "\n";
        return ExitCode::config_error;
    }
    if (cfg->command["name"].get<std::string>() != forced_command) {
        std::cerr << "config error: config command is '"
                  << cfg->command["name"].get<std::string>() << "', expected '" << forced_command
                  << "'\n";
        return ExitCode::config_error;
    }
    RunConfig cfg_run = *cfg;
    if (flags.seed_set) {
        cfg_run.seed = flags.seed;
        cfg_run.solver.seed = flags.seed;
    }
    if (flags.grid > 0) cfg_run.solver.verify_grid = flags.grid;
    if (flags.oracle) cfg_run.solver.oracle_compare = true;
    cfg_run.quiet = cfg_run.quiet || flags.quiet;

    ArtifactWriter writer(resolve_out_dir(flags.out_dir, cfg_run), /*to_disk=*/true);
    return dispatch(cfg_run, std::cout, writer);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-range mechanism toolkit: strategy-proof menus on "
                 "single-crossing preference domains"};
    app.require_subcommand(1);

    CommonFlags solve_flags, verify_flags, oracle_flags, sweep_flags, nbuyer_flags;
    CLI::App* solve = app.add_subcommand("solve", "solve the finite-range revenue program");
    add_common(solve, solve_flags);
    CLI::App* verify = app.add_subcommand("verify", "verify a mechanism record");
    add_common(verify, verify_flags);
    CLI::App* oracle = app.add_subcommand("oracle", "brute-force grid oracle");
    add_common(oracle, oracle_flags);
    CLI::App* sweep = app.add_subcommand("sweep", "solve across a range of menu sizes");
    add_common(sweep, sweep_flags);
    CLI::App* nbuyer = app.add_subcommand("nbuyer", "simulate n-buyer auction rules");
    add_common(nbuyer, nbuyer_flags);

    CommonFlags repro_flags;
    std::string example_id;
    CLI::App* reproduce =
        app.add_subcommand("reproduce", "re-run a bundled scenario and compare values");
    reproduce->add_option("example", example_id, "scenario id (or 'list')")->required();
    reproduce->add_option("--out", repro_flags.out_dir, "output directory for artifacts");
    reproduce->add_flag("--quiet", repro_flags.quiet, "suppress the row table");

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) return run_with_config(solve_flags, "solve");
    if (verify->parsed()) return run_with_config(verify_flags, "verify");
    if (oracle->parsed()) return run_with_config(oracle_flags, "oracle");
    if (sweep->parsed()) return run_with_config(sweep_flags, "sweep");
    if (nbuyer->parsed()) return run_with_config(nbuyer_flags, "nbuyer");
    if (reproduce->parsed()) {
        if (example_id == "list") {
            for (const auto& id : scenario_ids()) std::cout << id << "\n";
            return ExitCode::ok;
        }
        RunConfig cfg;
        ArtifactWriter writer(resolve_out_dir(repro_flags.out_dir, cfg), /*to_disk=*/true);
        return run_reproduce_id(example_id, repro_flags.quiet, std::cout, writer);
    }
    return ExitCode::config_error;
}
