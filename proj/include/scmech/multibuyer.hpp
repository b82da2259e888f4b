#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "scmech/distribution.hpp"
#include "scmech/error.hpp"
#include "scmech/mechanism.hpp"
#include "scmech/optimizer.hpp"
#include "scmech/rng.hpp"
#include "scmech/verifier.hpp"

namespace scmech {

/// Reported order indices, one per buyer.
struct BuyerProfile {
    std::vector<double> indices;
};

/// Per-buyer payment and win probability; win probabilities sum to at most 1.
struct AuctionOutcome {
    std::vector<Bundle> allocations;

    double total_payment() const {
        double total = 0.0;
        for (const Bundle& b : allocations) total += b.t;
        return total;
    }
    double total_win_probability() const {
        double total = 0.0;
        for (const Bundle& b : allocations) total += b.q;
        return total;
    }
};

/// Factory for the single-buyer mechanism used above the competing bound:
/// given the lower support bound (the strongest opponent), returns the
/// restricted one-buyer rule.
using OneBuyerRule = std::function<Result<StepMechanism>(double support_lo)>;

/// Restricted posted-price rule: maximizes reserve(theta) * (1 - Gamma(theta))
/// over [support_lo, param_hi]. Conditioning on types above the bound rescales
/// the objective by a constant, so the argmax is unchanged.
inline OneBuyerRule restricted_deterministic_rule(const PreferenceFamily& family,
                                                  const TypeDistribution& dist) {
    return [family, dist](double support_lo) -> Result<StepMechanism> {
        const double lo = std::max(support_lo, family.param_lo());
        const double hi = family.param_hi();
        auto revenue = [&](double th) {
            return family.label(th, Bundle{0.0, 0.0}) * (1.0 - dist.cdf(th).value_or(1.0));
        };
        const double best_x = detail::maximize_1d(revenue, lo, hi);
        const double t_star = family.label(best_x, Bundle{0.0, 0.0});
        return StepMechanism::build_from_geometry(
            family, {Bundle{0.0, 0.0}, Bundle{t_star, 1.0}}, {best_x});
    };
}

/// Lower-efficient extension of a one-buyer rule: every buyer weakly
/// dominated by another gets (0,0); the unique strict maximizer faces the
/// one-buyer rule restricted above the runner-up. Exact ties sell nothing.
inline Result<AuctionOutcome> lower_efficient_extend(const PreferenceFamily& family,
                                                     const BuyerProfile& profile,
                                                     const OneBuyerRule& one_buyer_rule) {
    const std::size_t n = profile.indices.size();
    AuctionOutcome outcome;
    outcome.allocations.assign(n, Bundle{0.0, 0.0});
    if (n == 0) return outcome;
    std::size_t winner = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (profile.indices[i] > profile.indices[winner]) winner = i;
    }
    double runner_up = family.param_lo();
    bool tied = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == winner) continue;
        runner_up = std::max(runner_up, profile.indices[i]);
        if (profile.indices[i] == profile.indices[winner]) tied = true;
    }
    if (tied && n > 1) return outcome;
    auto mech = one_buyer_rule(runner_up);
    if (!mech.ok()) return mech.error();
    outcome.allocations[winner] = mech->eval_unchecked(profile.indices[winner]);
    return outcome;
}

/// Second-price-with-reserve rule for linear preferences: the reserve solves
/// psi(theta) = 0, the winner pays max(reserve, runner-up). Requires a
/// monotone hazard so psi crosses zero once.
inline Result<AuctionOutcome> myerson_two_buyer(const TypeDistribution& dist,
                                                const BuyerProfile& profile) {
    if (profile.indices.size() != 2) {
        return fail<AuctionOutcome>(Errc::config_invalid, "rule is defined for two buyers");
    }
    if (!dist.is_monotone_hazard(200)) {
        return fail<AuctionOutcome>(Errc::nonmonotone_hazard,
                                    "virtual valuation is not single-crossing");
    }
    // root of the virtual valuation by bisection
    double lo = dist.support_lo(), hi = dist.support_hi();
    double reserve = lo;
    auto psi_lo = dist.virtual_value(lo);
    if (psi_lo.ok() && *psi_lo >= 0.0) {
        reserve = lo;
    } else {
        double a = lo, b = hi;
        for (int iter = 0; iter < 200 && b - a > 1e-14; ++iter) {
            const double mid = 0.5 * (a + b);
            auto psi = dist.virtual_value(mid);
            if (!psi.ok()) break;
            if (*psi == 0.0) {
                a = b = mid;
                break;
            }
            (*psi < 0.0 ? a : b) = mid;
        }
        reserve = 0.5 * (a + b);
    }

    AuctionOutcome outcome;
    outcome.allocations.assign(2, Bundle{0.0, 0.0});
    const double t1 = profile.indices[0], t2 = profile.indices[1];
    for (int i = 0; i < 2; ++i) {
        const double own = (i == 0) ? t1 : t2;
        const double other = (i == 0) ? t2 : t1;
        const double floor = std::max(reserve, other);
        if (own > floor) outcome.allocations[i] = Bundle{floor, 1.0};
    }
    return outcome;
}

/// Auction rule as a function of the full reported profile.
using AuctionRule = std::function<Result<AuctionOutcome>(const BuyerProfile&)>;

struct SimulationResult {
    double mean_revenue = 0.0;
    double standard_error = 0.0;
    std::uint64_t samples = 0;
};

/// Monte Carlo revenue: i.i.d. profiles drawn by inverse-CDF sampling in
/// fixed shard order with per-shard substreams, bitwise reproducible for a
/// given seed.
inline Result<SimulationResult> simulate(const TypeDistribution& dist, int n_buyers,
                                         const AuctionRule& rule, std::uint64_t samples,
                                         std::uint64_t seed) {
    if (samples < 1) return fail<SimulationResult>(Errc::config_invalid, "samples must be >= 1");
    const std::uint64_t shard_size = 4096;
    double sum = 0.0, sumsq = 0.0;
    BuyerProfile profile;
    profile.indices.resize(static_cast<std::size_t>(n_buyers));
    std::uint64_t drawn = 0;
    for (std::uint64_t shard = 0; drawn < samples; ++shard) {
        Rng rng = Rng::substream(seed, shard);
        const std::uint64_t in_shard = std::min(shard_size, samples - drawn);
        for (std::uint64_t i = 0; i < in_shard; ++i) {
            for (auto& x : profile.indices) x = dist.quantile(rng.u01());
            auto outcome = rule(profile);
            if (!outcome.ok()) return outcome.error();
            const double r = outcome->total_payment();
            sum += r;
            sumsq += r * r;
        }
        drawn += in_shard;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = (samples > 1) ? std::max(0.0, (sumsq / n - mean * mean) * n / (n - 1))
                                     : 0.0;
    return SimulationResult{mean, std::sqrt(var / n), samples};
}

/// Two-buyer strategy-proofness on a grid: for every opponent type, the
/// induced one-buyer option map must pass the pairwise misreport scan.
inline SpCheckResult check_sp_multibuyer(const AuctionRule& rule, const PreferenceFamily& family,
                                         int grid_n = 60, double tol = 1e-7) {
    SpCheckResult result;
    const double lo = family.param_lo(), hi = family.param_hi();
    for (int oj = 0; oj < grid_n; ++oj) {
        const double opponent = lo + (hi - lo) * static_cast<double>(oj) / (grid_n - 1);
        for (int buyer = 0; buyer < 2; ++buyer) {
            MechanismView option_map;
            option_map.lo = lo;
            option_map.hi = hi;
            option_map.at = [&rule, opponent, buyer](double own) {
                BuyerProfile p;
                p.indices = (buyer == 0) ? std::vector<double>{own, opponent}
                                         : std::vector<double>{opponent, own};
                auto outcome = rule(p);
                if (!outcome.ok()) return Bundle{0.0, 0.0};
                return outcome->allocations[static_cast<std::size_t>(buyer)];
            };
            auto sp = check_sp_grid(option_map, family, grid_n, tol, 10);
            if (!sp.ok) {
                result.ok = false;
                for (const auto& ce : sp.counterexamples) result.counterexamples.push_back(ce);
                if (result.counterexamples.size() >= 40) return result;
            }
        }
    }
    result.ok = result.counterexamples.empty();
    return result;
}

}  // namespace scmech
