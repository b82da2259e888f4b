#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "scmech/mechanism.hpp"
#include "scmech/preference.hpp"

namespace scmech {

/// A profitable misreport: truthful type, the report that beats it, the two
/// bundles involved, and the gain in indifference-label units.
struct SpCounterexample {
    double true_index = 0.0;
    double reported_index = 0.0;
    Bundle true_bundle;
    Bundle deviant_bundle;
    double utility_gap = 0.0;
};

struct Witness {
    double index_a = 0.0;
    double index_b = 0.0;
    Bundle bundle_a;
    Bundle bundle_b;
};

struct CheckResult {
    bool ok = true;
    std::optional<Witness> witness;
};

struct SpCheckResult {
    bool ok = true;
    std::vector<SpCounterexample> counterexamples;
};

struct VerificationReport {
    bool monotone = false;
    bool locally_sp = false;
    bool fully_sp = false;
    bool individually_rational = false;
    bool indirect_continuous = false;
    std::vector<SpCounterexample> counterexamples;

    bool all_ok() const {
        return monotone && locally_sp && fully_sp && individually_rational && indirect_continuous;
    }
};

namespace detail {

inline std::vector<double> verification_grid(double lo, double hi, int grid_n,
                                             const std::vector<double>& key_points) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_n) + 3 * key_points.size() + 2);
    for (int i = 0; i < grid_n; ++i) {
        grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (grid_n - 1));
    }
    for (double k : key_points) {
        for (double x : {k - 1e-6, k, k + 1e-6}) {
            if (x >= lo && x <= hi) grid.push_back(x);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace detail

/// Componentwise monotonicity of the evaluation map across a grid.
inline CheckResult check_monotone(const MechanismView& view, int grid_n = 400) {
    const auto grid = detail::verification_grid(view.lo, view.hi, std::max(grid_n, 2),
                                                view.key_points);
    Bundle prev = view.at(grid.front());
    double prev_x = grid.front();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const Bundle cur = view.at(grid[i]);
        if (cur.t < prev.t - 1e-12 || cur.q < prev.q - 1e-12) {
            return CheckResult{false, Witness{prev_x, grid[i], prev, cur}};
        }
        prev = cur;
        prev_x = grid[i];
    }
    return CheckResult{true, std::nullopt};
}

/// No profitable deviation to an adjacent range bundle, sampled from the two
/// cells that meet at each threshold.
inline CheckResult check_local_sp(const StepMechanism& mech, double tol = 1e-7) {
    const auto& bundles = mech.bundles();
    const auto& th = mech.thresholds();
    const double lo = mech.support_lo(), hi = mech.support_hi();
    for (std::size_t k = 0; k < th.size(); ++k) {
        const Bundle& below = bundles[k];
        const Bundle& above = bundles[k + 1];
        const double cell_lo = (k == 0) ? lo : th[k - 1];
        const double cell_hi = (k + 1 < th.size()) ? th[k + 1] : hi;
        const double probes_below[] = {std::max(lo, th[k] - 1e-6), 0.5 * (cell_lo + th[k])};
        for (double s : probes_below) {
            const Preference p = mech.family().at(s);
            const double gap = p.label(below) - p.label(above);
            if (gap > tol) {
                return CheckResult{false, Witness{s, th[k], below, above}};
            }
        }
        const double probes_above[] = {std::min(hi, th[k] + 1e-6), 0.5 * (th[k] + cell_hi)};
        for (double s : probes_above) {
            const Preference p = mech.family().at(s);
            const double gap = p.label(above) - p.label(below);
            if (gap > tol) {
                return CheckResult{false, Witness{s, th[k], above, below}};
            }
        }
    }
    return CheckResult{true, std::nullopt};
}

/// Exhaustive pairwise misreport scan over the grid: truthful label must not
/// exceed any misreport's label by more than `tol`.
inline SpCheckResult check_sp_grid(const MechanismView& view, const PreferenceFamily& family,
                                   int grid_n = 400, double tol = 1e-7,
                                   std::size_t max_counterexamples = 100) {
    const auto grid = detail::verification_grid(view.lo, view.hi, std::max(grid_n, 2),
                                                view.key_points);
    std::vector<Bundle> assigned(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) assigned[i] = view.at(grid[i]);

    SpCheckResult result;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Preference p = family.at(grid[i]);
        const double truthful = p.label(assigned[i]);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (i == j) continue;
            const double gap = truthful - p.label(assigned[j]);
            if (gap > tol) {
                result.counterexamples.push_back(
                    SpCounterexample{grid[i], grid[j], assigned[i], assigned[j], gap});
            }
        }
    }
    result.ok = result.counterexamples.empty();
    if (result.counterexamples.size() > max_counterexamples) {
        std::sort(result.counterexamples.begin(), result.counterexamples.end(),
                  [](const SpCounterexample& a, const SpCounterexample& b) {
                      if (a.utility_gap != b.utility_gap) return a.utility_gap > b.utility_gap;
                      if (a.true_index != b.true_index) return a.true_index < b.true_index;
                      return a.reported_index < b.reported_index;
                  });
        result.counterexamples.resize(max_counterexamples);
    }
    return result;
}

/// Individual rationality on a grid: the assigned bundle is weakly preferred
/// to (0,0).
inline SpCheckResult check_ir(const MechanismView& view, const PreferenceFamily& family,
                              int grid_n = 400, double tol = 1e-7) {
    const auto grid = detail::verification_grid(view.lo, view.hi, std::max(grid_n, 2),
                                                view.key_points);
    SpCheckResult result;
    const Bundle outside{0.0, 0.0};
    for (double x : grid) {
        const Preference p = family.at(x);
        const Bundle z = view.at(x);
        const double gap = p.label(z) - p.label(outside);
        if (gap > tol) {
            result.counterexamples.push_back(SpCounterexample{x, x, z, outside, gap});
        }
    }
    result.ok = result.counterexamples.empty();
    return result;
}

/// Threshold indifference of a step mechanism: at every threshold the two
/// adjacent bundles carry equal labels.
inline CheckResult check_indirect_continuity(const StepMechanism& mech, double tol = 1e-7) {
    const auto& bundles = mech.bundles();
    const auto& th = mech.thresholds();
    for (std::size_t k = 0; k < th.size(); ++k) {
        const Preference p = mech.family().at(th[k]);
        if (std::abs(p.label(bundles[k]) - p.label(bundles[k + 1])) > tol) {
            return CheckResult{false, Witness{th[k], th[k], bundles[k], bundles[k + 1]}};
        }
    }
    return CheckResult{true, std::nullopt};
}

/// One-sided label limits at the jump points of a tabulated view: scans the
/// grid for jumps, refines each bracket, and compares the labels of the two
/// one-sided bundles under the jump preference.
inline CheckResult check_indirect_continuity(const MechanismView& view,
                                             const PreferenceFamily& family, int grid_n = 400,
                                             double tol = 1e-7) {
    const auto grid = detail::verification_grid(view.lo, view.hi, std::max(grid_n, 2),
                                                view.key_points);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i], b = grid[i + 1];
        Bundle za = view.at(a), zb = view.at(b);
        if (approx_equal(za, zb, 1e-12)) continue;
        // refine the bracket around the change point
        for (int iter = 0; iter < 80 && b - a > 1e-13; ++iter) {
            const double mid = 0.5 * (a + b);
            const Bundle zm = view.at(mid);
            if (approx_equal(zm, za, 1e-12)) {
                a = mid;
            } else {
                b = mid;
                zb = zm;
            }
        }
        // a smooth view shows only a vanishing step once refined
        if (approx_equal(za, zb, 1e-7)) continue;
        const Preference p = family.at(0.5 * (a + b));
        if (std::abs(p.label(za) - p.label(zb)) > tol) {
            return CheckResult{false, Witness{a, b, za, zb}};
        }
    }
    return CheckResult{true, std::nullopt};
}

/// Full verification of a step mechanism.
inline VerificationReport verify_mechanism(const StepMechanism& mech, int grid_n = 400,
                                           double tol = 1e-7) {
    const MechanismView view = make_view(mech);
    VerificationReport report;
    report.monotone = check_monotone(view, grid_n).ok;
    report.locally_sp = check_local_sp(mech, tol).ok;
    auto sp = check_sp_grid(view, mech.family(), grid_n, tol);
    report.fully_sp = sp.ok;
    report.counterexamples = std::move(sp.counterexamples);
    report.individually_rational = check_ir(view, mech.family(), grid_n, tol).ok;
    report.indirect_continuous = check_indirect_continuity(mech, tol).ok;
    return report;
}

/// Full verification of a tabulated view.
inline VerificationReport verify_view(const MechanismView& view, const PreferenceFamily& family,
                                      int grid_n = 400, double tol = 1e-7) {
    VerificationReport report;
    report.monotone = check_monotone(view, grid_n).ok;
    auto sp = check_sp_grid(view, family, grid_n, tol);
    report.fully_sp = sp.ok;
    report.locally_sp = sp.ok;  // no adjacency structure beyond the grid scan
    report.counterexamples = std::move(sp.counterexamples);
    report.individually_rational = check_ir(view, family, grid_n, tol).ok;
    report.indirect_continuous = check_indirect_continuity(view, family, grid_n, tol).ok;
    return report;
}

}  // namespace scmech
