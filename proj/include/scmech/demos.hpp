#pragma once

#include "scmech/mechanism.hpp"
#include "scmech/preference.hpp"

namespace scmech {

/// Posted-price view with a dip: the two posted prices are the reserve
/// payments of `th_low` and `th_high`, low types buy cheap, middle types get
/// nothing, high types buy dear. The induced value function is continuous,
/// the assignment is not monotone.
inline MechanismView dip_view(const PreferenceFamily& fam, double th_low, double th_high) {
    const double t_low = fam.label(th_low, Bundle{0.0, 0.0});
    const double t_high = fam.label(th_high, Bundle{0.0, 0.0});
    MechanismView v;
    v.lo = fam.param_lo();
    v.hi = fam.param_hi();
    v.key_points = {th_low, th_high};
    v.at = [=](double s) {
        if (s <= th_low) return Bundle{t_low, 1.0};
        if (s < th_high) return Bundle{0.0, 0.0};
        return Bundle{t_high, 1.0};
    };
    return v;
}

/// Monotone two-bundle step whose jump index is NOT the preference indifferent
/// between the bundles; bypasses construction checks on purpose.
inline StepMechanism non_indifferent_step(const PreferenceFamily& fam, Bundle low, Bundle high,
                                          double jump_at) {
    return StepMechanism::from_parts_unchecked(fam, {low, high}, {jump_at});
}

/// Continuum-range ramp: win probability climbs affinely from 0 to 1 over the
/// support and the payment is a fixed fraction of it. Monotone, continuous,
/// individually rational on linear domains with param_lo >= payment slope.
inline MechanismView ramp_view(const PreferenceFamily& fam, double payment_per_q = 1.0 / 3.0) {
    MechanismView v;
    v.lo = fam.param_lo();
    v.hi = fam.param_hi();
    const double lo = v.lo, hi = v.hi;
    v.at = [=](double s) {
        const double q = (s - lo) / (hi - lo);
        return Bundle{payment_per_q * q, q};
    };
    return v;
}

}  // namespace scmech
