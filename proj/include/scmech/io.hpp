#pragma once

#include <string>

#include <json.hpp>

#include "scmech/distribution.hpp"
#include "scmech/error.hpp"
#include "scmech/mechanism.hpp"
#include "scmech/multibuyer.hpp"
#include "scmech/optimizer.hpp"
#include "scmech/preference.hpp"
#include "scmech/verifier.hpp"

namespace scmech {

using json = nlohmann::json;

inline json to_json(const Bundle& z) { return json::array({z.t, z.q}); }

inline Result<Bundle> bundle_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        return fail<Bundle>(Errc::config_invalid, "bundle must be a [payment, probability] pair");
    }
    Bundle z{j[0].get<double>(), j[1].get<double>()};
    if (!z.valid()) return fail<Bundle>(Errc::config_invalid, "bundle outside the bundle space");
    return z;
}

inline json to_json(const PreferenceFamily& fam) {
    json j{{"kind", family_kind_name(fam.kind())},
           {"param_lo", fam.param_lo()},
           {"param_hi", fam.param_hi()}};
    switch (fam.kind()) {
        case FamilyKind::power_weighted:
            j["constants"] = {{"a", fam.constants().a}, {"c", fam.constants().c}};
            break;
        case FamilyKind::piecewise_weighting:
            j["constants"] = {{"theta_hat", fam.constants().theta_hat},
                              {"q_star", fam.constants().q_star}};
            break;
        default:
            break;
    }
    return j;
}

inline Result<PreferenceFamily> family_from_json(const json& j) {
    auto bad = [](std::string m) { return fail<PreferenceFamily>(Errc::config_invalid, m); };
    if (!j.is_object()) return bad("family block must be an object");
    if (!j.contains("kind") || !j["kind"].is_string()) return bad("family.kind missing");
    const std::string kind = j["kind"].get<std::string>();
    if (!j.contains("param_lo") || !j.contains("param_hi")) {
        return bad("family.param_lo / family.param_hi missing");
    }
    const double lo = j["param_lo"].get<double>();
    const double hi = j["param_hi"].get<double>();
    FamilyConstants k;
    if (j.contains("constants")) {
        const json& c = j["constants"];
        if (c.contains("a")) k.a = c["a"].get<double>();
        if (c.contains("c")) k.c = c["c"].get<double>();
        if (c.contains("theta_hat")) k.theta_hat = c["theta_hat"].get<double>();
        if (c.contains("q_star")) k.q_star = c["q_star"].get<double>();
    }
    FamilyKind fk;
    if (kind == "linear") {
        fk = FamilyKind::linear;
    } else if (kind == "quadratic_payment") {
        fk = FamilyKind::quadratic_payment;
    } else if (kind == "power_weighted") {
        fk = FamilyKind::power_weighted;
    } else if (kind == "piecewise_weighting") {
        fk = FamilyKind::piecewise_weighting;
    } else if (kind == "two_param_uv") {
        fk = FamilyKind::two_param_uv;
    } else {
        return bad("family.kind '" + kind + "' is not recognized");
    }
    auto fam = PreferenceFamily::make(fk, lo, hi, k);
    if (!fam.ok()) return bad("family: " + fam.error().message);
    return fam;
}

inline json to_json(const TypeDistribution& dist) {
    json j{{"kind", dist_kind_name(dist.kind())},
           {"support_lo", dist.support_lo()},
           {"support_hi", dist.support_hi()}};
    if (dist.kind() == DistKind::truncated_exponential) j["rate"] = dist.rate();
    if (dist.kind() == DistKind::piecewise_linear_cdf) {
        j["knots_x"] = dist.knot_x();
        j["knots_f"] = dist.knot_f();
    }
    return j;
}

inline Result<TypeDistribution> dist_from_json(const json& j) {
    auto bad = [](std::string m) { return fail<TypeDistribution>(Errc::config_invalid, m); };
    if (!j.is_object()) return bad("distribution block must be an object");
    if (!j.contains("kind") || !j["kind"].is_string()) return bad("distribution.kind missing");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "piecewise_linear_cdf") {
        if (!j.contains("knots_x") || !j.contains("knots_f")) {
            return bad("distribution.knots_x / knots_f missing");
        }
        auto d = TypeDistribution::piecewise_linear(j["knots_x"].get<std::vector<double>>(),
                                                    j["knots_f"].get<std::vector<double>>());
        if (!d.ok()) return bad("distribution: " + d.error().message);
        return d;
    }
    if (!j.contains("support_lo") || !j.contains("support_hi")) {
        return bad("distribution.support_lo / support_hi missing");
    }
    const double lo = j["support_lo"].get<double>();
    const double hi = j["support_hi"].get<double>();
    Result<TypeDistribution> d = fail<TypeDistribution>(Errc::config_invalid, "unreachable");
    if (kind == "uniform") {
        d = TypeDistribution::uniform(lo, hi);
    } else if (kind == "affine_cdf") {
        d = TypeDistribution::affine(lo, hi);
    } else if (kind == "truncated_exponential") {
        if (!j.contains("rate")) return bad("distribution.rate missing");
        d = TypeDistribution::truncated_exponential(lo, hi, j["rate"].get<double>());
    } else {
        return bad("distribution.kind '" + kind + "' is not recognized");
    }
    if (!d.ok()) return bad("distribution: " + d.error().message);
    return d;
}

/// Mechanism record: family reference, bundle array, threshold array.
inline json mechanism_record(const StepMechanism& mech) {
    json bundles = json::array();
    for (const Bundle& z : mech.bundles()) bundles.push_back(to_json(z));
    return json{{"type", "mechanism"},
                {"family", to_json(mech.family())},
                {"bundles", bundles},
                {"thresholds", mech.thresholds()}};
}

/// Ingest a mechanism record. Lenient mode skips the geometry checks so the
/// verifier can be pointed at broken mechanisms.
inline Result<StepMechanism> mechanism_from_json(const json& j, bool lenient = false) {
    auto bad = [](std::string m) { return fail<StepMechanism>(Errc::config_invalid, m); };
    if (!j.is_object() || !j.contains("family") || !j.contains("bundles") ||
        !j.contains("thresholds")) {
        return bad("mechanism record needs family, bundles and thresholds");
    }
    auto fam = family_from_json(j["family"]);
    if (!fam.ok()) return fam.error();
    std::vector<Bundle> bundles;
    for (const json& bj : j["bundles"]) {
        auto z = bundle_from_json(bj);
        if (!z.ok()) return z.error();
        bundles.push_back(*z);
    }
    std::vector<double> thresholds = j["thresholds"].get<std::vector<double>>();
    if (lenient) {
        if (bundles.empty() || thresholds.size() + 1 != bundles.size()) {
            return bad("mechanism record shape mismatch");
        }
        return StepMechanism::from_parts_unchecked(*fam, std::move(bundles),
                                                   std::move(thresholds));
    }
    return StepMechanism::build_from_geometry(*fam, std::move(bundles), std::move(thresholds));
}

inline json to_json(const SpCounterexample& ce) {
    return json{{"true_index", ce.true_index},
                {"reported_index", ce.reported_index},
                {"true_bundle", to_json(ce.true_bundle)},
                {"deviant_bundle", to_json(ce.deviant_bundle)},
                {"utility_gap", ce.utility_gap}};
}

inline json to_json(const VerificationReport& report) {
    json ces = json::array();
    for (const auto& ce : report.counterexamples) ces.push_back(to_json(ce));
    return json{{"type", "verification"},
                {"monotone", report.monotone},
                {"locally_sp", report.locally_sp},
                {"fully_sp", report.fully_sp},
                {"individually_rational", report.individually_rational},
                {"indirect_continuous", report.indirect_continuous},
                {"counterexamples", ces}};
}

inline json to_json(const SolveSolution& sol) {
    json starts = json::array();
    for (const auto& s : sol.starts) {
        starts.push_back(json{{"start", s.start}, {"kind", s.kind}, {"objective", s.objective}});
    }
    return json{{"type", "solution"},
                {"payments", sol.payments},
                {"probabilities", sol.probabilities},
                {"thresholds", sol.thresholds},
                {"objective", sol.objective},
                {"mechanism", mechanism_record(sol.mechanism)},
                {"foc_residuals", sol.foc_residuals},
                {"verification", to_json(sol.verification)},
                {"starts", starts}};
}

inline json to_json(const SimulationResult& sim) {
    return json{{"type", "simulation"},
                {"mean_revenue", sim.mean_revenue},
                {"standard_error", sim.standard_error},
                {"samples", sim.samples}};
}

}  // namespace scmech
