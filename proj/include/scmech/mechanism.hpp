#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "scmech/bundle.hpp"
#include "scmech/distribution.hpp"
#include "scmech/error.hpp"
#include "scmech/preference.hpp"

namespace scmech {

enum class TieRule { lower_bundle };

/// Finite-range mechanism: an ordered list of bundles separated by threshold
/// preferences, each threshold indifferent between its two adjacent bundles.
///
/// Cells are right-closed: the bundle switches strictly above each threshold,
/// so the threshold type itself keeps the lower bundle.
class StepMechanism {
public:
    static Result<StepMechanism> build_from_geometry(const PreferenceFamily& family,
                                                     std::vector<Bundle> bundles,
                                                     std::vector<double> thresholds,
                                                     double tol = 1e-7) {
        if (bundles.empty()) {
            return fail<StepMechanism>(Errc::config_invalid, "bundle list must be nonempty");
        }
        if (thresholds.size() + 1 != bundles.size()) {
            return fail<StepMechanism>(Errc::config_invalid,
                                       "need exactly one threshold between adjacent bundles");
        }
        for (const Bundle& z : bundles) {
            if (!z.valid()) {
                return fail<StepMechanism>(Errc::config_invalid, "invalid bundle in range");
            }
        }
        for (std::size_t k = 0; k + 1 < bundles.size(); ++k) {
            const Bundle& a = bundles[k];
            const Bundle& b = bundles[k + 1];
            if (!(a == b) && !strictly_below(a, b)) {
                return fail<StepMechanism>(Errc::not_diagonal,
                                           "consecutive distinct bundles must be strictly "
                                           "diagonal and increasing");
            }
        }
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (!family.contains_index(thresholds[k])) {
                return fail<StepMechanism>(Errc::out_of_range,
                                           "threshold outside the family index bounds");
            }
            if (k > 0 && thresholds[k] < thresholds[k - 1]) {
                return fail<StepMechanism>(Errc::thresholds_decreasing,
                                           "thresholds must be nondecreasing");
            }
            const double gap = std::abs(family.label(thresholds[k], bundles[k]) -
                                        family.label(thresholds[k], bundles[k + 1]));
            if (gap > tol) {
                return fail<StepMechanism>(
                    Errc::threshold_not_indifferent,
                    "threshold " + std::to_string(thresholds[k]) +
                        " is not indifferent between its adjacent bundles (gap " +
                        std::to_string(gap) + ")");
            }
        }
        return StepMechanism(family, std::move(bundles), std::move(thresholds));
    }

    /// Constant mechanism assigning one bundle everywhere.
    static Result<StepMechanism> constant(const PreferenceFamily& family, Bundle z) {
        return build_from_geometry(family, {z}, {});
    }

    /// Bypasses the geometry checks; for diagnostics and verifier tests only.
    static StepMechanism from_parts_unchecked(const PreferenceFamily& family,
                                              std::vector<Bundle> bundles,
                                              std::vector<double> thresholds) {
        return StepMechanism(family, std::move(bundles), std::move(thresholds));
    }

    const PreferenceFamily& family() const { return family_; }
    const std::vector<Bundle>& bundles() const { return bundles_; }
    const std::vector<double>& thresholds() const { return thresholds_; }
    double support_lo() const { return family_.param_lo(); }
    double support_hi() const { return family_.param_hi(); }
    TieRule tie_rule() const { return TieRule::lower_bundle; }

    Result<Bundle> evaluate(double index) const {
        if (index < support_lo() || index > support_hi()) {
            return fail<Bundle>(Errc::out_of_support,
                                "index " + std::to_string(index) + " outside the support");
        }
        return eval_unchecked(index);
    }

    Bundle eval_unchecked(double index) const {
        // number of thresholds strictly below the index = cell of the index;
        // equality keeps the lower bundle (right-closed cells).
        std::size_t k = 0;
        while (k < thresholds_.size() && thresholds_[k] < index) ++k;
        return bundles_[k];
    }

    /// Expected revenue: sum of each cell's payment times its type mass.
    Result<double> expected_revenue(const TypeDistribution& dist) const {
        if (std::abs(dist.support_lo() - support_lo()) > 1e-12 ||
            std::abs(dist.support_hi() - support_hi()) > 1e-12) {
            return fail<double>(Errc::support_mismatch,
                                "distribution support must equal the family index bounds");
        }
        double total = 0.0;
        for (std::size_t k = 0; k < bundles_.size(); ++k) {
            const double lo = (k == 0) ? support_lo() : thresholds_[k - 1];
            const double hi = (k == bundles_.size() - 1) ? support_hi() : thresholds_[k];
            auto mass = dist.interval_mass(lo, hi);
            if (!mass.ok()) return mass.error();
            total += bundles_[k].t * *mass;
        }
        return total;
    }

    struct Cell {
        Bundle bundle;
        double lo, hi;
    };

    /// Cells of positive width (wider than `width_tol`), adjacent equal
    /// bundles merged. The cells partition the support.
    std::vector<Cell> effective_range(double width_tol = 0.0) const {
        std::vector<Cell> cells;
        for (std::size_t k = 0; k < bundles_.size(); ++k) {
            const double lo = (k == 0) ? support_lo() : thresholds_[k - 1];
            const double hi = (k == bundles_.size() - 1) ? support_hi() : thresholds_[k];
            if (!cells.empty() && cells.back().bundle == bundles_[k]) {
                cells.back().hi = hi;
                continue;
            }
            cells.push_back(Cell{bundles_[k], lo, hi});
        }
        std::vector<Cell> kept;
        for (const Cell& c : cells) {
            if (c.hi - c.lo > width_tol) {
                kept.push_back(c);
            } else if (!kept.empty()) {
                kept.back().hi = c.hi;
            }
        }
        // a zero-width run at the bottom belongs to the first surviving cell
        if (!kept.empty()) kept.front().lo = support_lo();
        return kept;
    }

private:
    StepMechanism(const PreferenceFamily& family, std::vector<Bundle> bundles,
                  std::vector<double> thresholds)
        : family_(family), bundles_(std::move(bundles)), thresholds_(std::move(thresholds)) {}

    PreferenceFamily family_;
    std::vector<Bundle> bundles_;
    std::vector<double> thresholds_;
};

/// Canonical merged form: duplicate adjacent bundles deduped, zero-width
/// interior cells dropped, an unattained top bundle removed. The bottom
/// bundle always stays; it anchors participation even when its cell is a
/// single point.
inline Result<StepMechanism> collapse(const StepMechanism& mech, double width_tol = 1e-6,
                                      double bundle_tol = 1e-9) {
    struct Entry {
        Bundle z;
        double lo, hi;
    };
    std::vector<Entry> entries;
    const auto& bundles = mech.bundles();
    const auto& th = mech.thresholds();
    for (std::size_t k = 0; k < bundles.size(); ++k) {
        const double lo = (k == 0) ? mech.support_lo() : th[k - 1];
        const double hi = (k == bundles.size() - 1) ? mech.support_hi() : th[k];
        if (!entries.empty() && approx_equal(entries.back().z, bundles[k], bundle_tol)) {
            entries.back().hi = hi;
            continue;
        }
        entries.push_back(Entry{bundles[k], lo, hi});
    }
    // drop zero-width middles ("throw away" coincident special preferences)
    std::vector<Entry> kept;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const bool first = kept.empty();
        const bool last = (i + 1 == entries.size());
        if (!first && !last && entries[i].hi - entries[i].lo <= width_tol) continue;
        kept.push_back(entries[i]);
    }
    // a top bundle pinned at the very top of the support is never assigned
    while (kept.size() > 1 && kept.back().hi - kept.back().lo <= width_tol &&
           kept.back().hi >= mech.support_hi() - width_tol) {
        kept.pop_back();
    }
    std::vector<Bundle> out_bundles;
    std::vector<double> out_thresholds;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out_bundles.push_back(kept[i].z);
        if (i + 1 < kept.size()) out_thresholds.push_back(kept[i + 1].lo);
    }
    const double rebuild_tol = std::max(1e-7, 20.0 * width_tol);
    return StepMechanism::build_from_geometry(mech.family(), std::move(out_bundles),
                                              std::move(out_thresholds), rebuild_tol);
}

/// Evaluation map from order index to bundle, for step mechanisms and for
/// tabulated diagnostic mechanisms alike.
struct MechanismView {
    std::function<Bundle(double)> at;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> key_points;  // always included in verification grids
};

inline MechanismView make_view(const StepMechanism& mech) {
    MechanismView v;
    v.at = [mech](double index) { return mech.eval_unchecked(index); };
    v.lo = mech.support_lo();
    v.hi = mech.support_hi();
    v.key_points = mech.thresholds();
    return v;
}

}  // namespace scmech
