#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include "scmech/config.hpp"
#include "scmech/io.hpp"
#include "scmech/scenarios.hpp"

namespace scmech {

struct ExitCode {
    static constexpr int ok = 0;
    static constexpr int config_error = 2;
    static constexpr int verification_failure = 3;
    static constexpr int solver_stall = 4;
};

/// Collects named artifacts and optionally persists them under the output
/// directory. Keeping the bytes in memory makes determinism directly testable.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string out_dir = "", bool to_disk = false)
        : out_dir_(std::move(out_dir)), to_disk_(to_disk) {}

    bool put(const std::string& name, const std::string& content) {
        artifacts_[name] = content;
        if (!to_disk_) return true;
        std::error_code ec;
        std::filesystem::create_directories(out_dir_, ec);
        std::ofstream out(std::filesystem::path(out_dir_) / name, std::ios::binary);
        if (!out) return false;
        out << content;
        return static_cast<bool>(out);
    }

    const std::map<std::string, std::string>& artifacts() const { return artifacts_; }

private:
    std::string out_dir_;
    bool to_disk_;
    std::map<std::string, std::string> artifacts_;
};

namespace detail {

inline std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string ndjson(const std::vector<json>& records) {
    std::string out;
    for (const json& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

inline int config_error(std::ostream& os, const std::string& message) {
    os << "config error: " << message << "\n";
    return ExitCode::config_error;
}

inline std::string verdict(bool ok) { return ok ? "pass" : "FAIL"; }

inline void print_report(std::ostream& os, const VerificationReport& report) {
    os << "  monotone:               " << verdict(report.monotone) << "\n"
       << "  locally sp in range:    " << verdict(report.locally_sp) << "\n"
       << "  strategy-proof (grid):  " << verdict(report.fully_sp) << "\n"
       << "  individually rational:  " << verdict(report.individually_rational) << "\n"
       << "  indirect continuity:    " << verdict(report.indirect_continuous) << "\n";
    if (!report.counterexamples.empty()) {
        const auto& ce = report.counterexamples.front();
        os << "  first counterexample: true " << ce.true_index << " -> report "
           << ce.reported_index << ", gap " << ce.utility_gap << "\n";
    }
}

}  // namespace detail

inline int run_solve(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.family || !cfg.distribution) {
        return detail::config_error(os, "solve needs family and distribution blocks");
    }
    if (!cfg.seed) return detail::config_error(os, "solve needs a master seed");
    if (!cfg.command.contains("l")) return detail::config_error(os, "command.l missing");
    const int l = cfg.command["l"].get<int>();
    if (l < 2) return detail::config_error(os, "command.l must be at least 2");

    auto sol = solve_optimal(*cfg.family, *cfg.distribution, l, cfg.solver);
    if (!sol.ok()) {
        os << "solver error: " << sol.error().to_string() << "\n";
        return sol.error().code == Errc::solver_stalled ? ExitCode::solver_stall
                                                        : ExitCode::config_error;
    }

    std::vector<json> records{to_json(*sol)};
    if (cfg.solver.oracle_compare) {
        auto oracle = brute_force_oracle(*cfg.family, *cfg.distribution, l,
                                         cfg.solver.oracle_grid);
        if (oracle.ok()) records.push_back(to_json(*oracle));
    }
    out.put("mechanism.json", mechanism_record(sol->mechanism).dump(2) + "\n");
    out.put("solution.ndjson", detail::ndjson(records));
    std::string csv = "start,kind,objective\n";
    for (const auto& s : sol->starts) {
        csv += std::to_string(s.start) + "," + s.kind + "," + detail::csv_number(s.objective) +
               "\n";
    }
    out.put("diagnostics.csv", csv);

    if (!cfg.quiet) {
        os << "solve: l=" << l << " objective=" << sol->objective << " distinct bundles="
           << sol->mechanism.bundles().size() << "\n";
        detail::print_report(os, sol->verification);
    }
    return sol->verification.all_ok() ? ExitCode::ok : ExitCode::verification_failure;
}

inline int run_oracle(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.family || !cfg.distribution) {
        return detail::config_error(os, "oracle needs family and distribution blocks");
    }
    if (!cfg.command.contains("l")) return detail::config_error(os, "command.l missing");
    const int l = cfg.command["l"].get<int>();
    if (l < 2) return detail::config_error(os, "command.l must be at least 2");
    GridSpec grid = cfg.solver.oracle_grid;
    if (cfg.command.contains("theta_grid")) grid.theta_points = cfg.command["theta_grid"];
    if (cfg.command.contains("q_grid")) grid.q_points = cfg.command["q_grid"];

    auto sol = brute_force_oracle(*cfg.family, *cfg.distribution, l, grid);
    if (!sol.ok()) return detail::config_error(os, sol.error().to_string());
    out.put("oracle.ndjson", detail::ndjson({to_json(*sol)}));
    out.put("oracle_mechanism.json", mechanism_record(sol->mechanism).dump(2) + "\n");
    if (!cfg.quiet) {
        os << "oracle: l=" << l << " grid=" << grid.theta_points << "x" << grid.q_points
           << " objective=" << sol->objective << "\n";
    }
    return ExitCode::ok;
}

inline int run_verify(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.command.contains("mechanism_file")) {
        return detail::config_error(os, "command.mechanism_file missing");
    }
    std::ifstream in(cfg.command["mechanism_file"].get<std::string>());
    if (!in) return detail::config_error(os, "cannot open mechanism file");
    json mj;
    try {
        in >> mj;
    } catch (const json::parse_error& e) {
        return detail::config_error(os, std::string("mechanism parse error: ") + e.what());
    }
    auto mech = mechanism_from_json(mj, /*lenient=*/true);
    if (!mech.ok()) return detail::config_error(os, mech.error().to_string());
    const int grid = cfg.command.contains("grid") ? cfg.command["grid"].get<int>() : 400;

    auto report = verify_mechanism(*mech, grid);
    out.put("report.ndjson", detail::ndjson({to_json(report)}));
    if (!cfg.quiet) {
        os << "verify: grid=" << grid << "\n";
        detail::print_report(os, report);
    }
    return report.all_ok() ? ExitCode::ok : ExitCode::verification_failure;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.family || !cfg.distribution) {
        return detail::config_error(os, "sweep needs family and distribution blocks");
    }
    if (!cfg.seed) return detail::config_error(os, "sweep needs a master seed");
    std::vector<int> ls;
    if (cfg.command.contains("l_values")) {
        ls = cfg.command["l_values"].get<std::vector<int>>();
    } else if (cfg.command.contains("l_min") && cfg.command.contains("l_max")) {
        for (int l = cfg.command["l_min"]; l <= cfg.command["l_max"].get<int>(); ++l) {
            ls.push_back(l);
        }
    }
    if (ls.empty()) return detail::config_error(os, "sweep needs a nonempty l range");
    for (int l : ls) {
        if (l < 2) return detail::config_error(os, "every l must be at least 2");
    }

    std::string csv = "l,objective,distinct_bundles,converged\n";
    std::vector<json> records;
    double prev = -1.0;
    bool monotone = true;
    SolveOptions options = cfg.solver;
    std::vector<double> prev_th, prev_q;
    const double convergence_tol = 1e-6;
    for (int l : ls) {
        options.extra_starts.clear();
        if (!prev_th.empty()) {
            options.extra_starts.push_back(encode_start(*cfg.family, prev_th, prev_q, l));
        }
        auto sol = solve_optimal(*cfg.family, *cfg.distribution, l, options);
        if (!sol.ok()) {
            os << "solver error at l=" << l << ": " << sol.error().to_string() << "\n";
            return sol.error().code == Errc::solver_stalled ? ExitCode::solver_stall
                                                            : ExitCode::config_error;
        }
        const bool converged = prev >= 0.0 && std::abs(sol->objective - prev) < convergence_tol;
        monotone = monotone && sol->objective >= prev - 1e-9;
        csv += std::to_string(l) + "," + detail::csv_number(sol->objective) + "," +
               std::to_string(sol->mechanism.bundles().size()) + "," +
               (converged ? "1" : "0") + "\n";
        json rec = to_json(*sol);
        rec["l"] = l;
        records.push_back(std::move(rec));
        prev = sol->objective;
        prev_th = sol->thresholds;
        prev_q = sol->probabilities;
        if (!cfg.quiet) {
            os << "sweep: l=" << l << " objective=" << sol->objective << " distinct bundles="
               << sol->mechanism.bundles().size() << (converged ? " (converged)" : "") << "\n";
        }
    }
    out.put("sweep.csv", csv);
    out.put("sweep.ndjson", detail::ndjson(records));
    if (!monotone) {
        os << "sweep: objective decreased as l grew\n";
        return ExitCode::verification_failure;
    }
    return ExitCode::ok;
}

inline int run_nbuyer(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.distribution) return detail::config_error(os, "nbuyer needs a distribution block");
    if (!cfg.seed) return detail::config_error(os, "nbuyer needs a master seed");
    const int buyers = cfg.command.contains("buyers") ? cfg.command["buyers"].get<int>() : 2;
    const std::uint64_t samples =
        cfg.command.contains("samples") ? cfg.command["samples"].get<std::uint64_t>() : 100000;
    const std::string rule_name =
        cfg.command.contains("rule") ? cfg.command["rule"].get<std::string>() : "myerson";

    AuctionRule rule;
    const TypeDistribution dist = *cfg.distribution;
    if (rule_name == "myerson") {
        if (buyers != 2) return detail::config_error(os, "the myerson rule needs two buyers");
        rule = [dist](const BuyerProfile& p) { return myerson_two_buyer(dist, p); };
    } else if (rule_name == "lower_efficient") {
        if (!cfg.family) return detail::config_error(os, "lower_efficient needs a family block");
        const PreferenceFamily fam = *cfg.family;
        auto one_buyer = restricted_deterministic_rule(fam, dist);
        rule = [fam, one_buyer](const BuyerProfile& p) {
            return lower_efficient_extend(fam, p, one_buyer);
        };
    } else if (rule_name == "zero") {
        rule = [](const BuyerProfile& p) {
            AuctionOutcome o;
            o.allocations.assign(p.indices.size(), Bundle{0, 0});
            return Result<AuctionOutcome>(o);
        };
    } else {
        return detail::config_error(os, "unknown rule '" + rule_name + "'");
    }

    auto sim = simulate(dist, buyers, rule, samples, *cfg.seed);
    if (!sim.ok()) return detail::config_error(os, sim.error().to_string());
    json rec = to_json(*sim);
    rec["rule"] = rule_name;
    rec["buyers"] = buyers;
    rec["seed"] = *cfg.seed;
    out.put("simulation.ndjson", detail::ndjson({rec}));
    if (!cfg.quiet) {
        os << "nbuyer: rule=" << rule_name << " buyers=" << buyers << " samples=" << samples
           << " mean=" << sim->mean_revenue << " se=" << sim->standard_error << "\n";
    }
    return ExitCode::ok;
}

inline int run_reproduce_id(const std::string& id, bool quiet, std::ostream& os,
                            ArtifactWriter& out) {
    auto result = run_scenario(id);
    if (!result.ok()) {
        os << result.error().to_string() << "\n";
        return ExitCode::config_error;
    }
    std::vector<json> records;
    for (const auto& row : result->rows) {
        records.push_back(json{{"type", "reproduce_row"},
                               {"id", result->id},
                               {"metric", row.metric},
                               {"expected", row.expected},
                               {"computed", row.computed},
                               {"tol", row.tol},
                               {"pass", row.pass}});
    }
    out.put("reproduce_" + id + ".ndjson", detail::ndjson(records));
    if (!quiet) {
        os << id << "\n";
        for (const auto& row : result->rows) {
            char line[256];
            std::snprintf(line, sizeof(line), "  %-34s expected %-14.8g computed %-14.8g %s\n",
                          row.metric.c_str(), row.expected, row.computed,
                          row.pass ? "PASS" : "FAIL");
            os << line;
        }
    }
    return result->all_pass ? ExitCode::ok : ExitCode::verification_failure;
}

inline int run_reproduce(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    if (!cfg.command.contains("example")) {
        return detail::config_error(os, "command.example missing");
    }
    return run_reproduce_id(cfg.command["example"].get<std::string>(), cfg.quiet, os, out);
}

/// Routes a parsed config to its command runner.
inline int dispatch(const RunConfig& cfg, std::ostream& os, ArtifactWriter& out) {
    const std::string name = cfg.command["name"].get<std::string>();
    if (name == "solve") return run_solve(cfg, os, out);
    if (name == "oracle") return run_oracle(cfg, os, out);
    if (name == "verify") return run_verify(cfg, os, out);
    if (name == "sweep") return run_sweep(cfg, os, out);
    if (name == "nbuyer") return run_nbuyer(cfg, os, out);
    if (name == "reproduce") return run_reproduce(cfg, os, out);
    return detail::config_error(os, "unknown command '" + name + "'");
}

}  // namespace scmech
