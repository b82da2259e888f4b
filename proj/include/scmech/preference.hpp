#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <string>
#include <vector>

#include "scmech/bundle.hpp"
#include "scmech/error.hpp"

namespace scmech {

class Preference;

/// Parametric single-crossing preference families over bundles (t, q).
///
/// Every family is ordered by one scalar index: a larger index cuts a smaller
/// one from above, i.e. indifference labels grow pointwise with the index.
enum class FamilyKind {
    linear,                // index*q - t
    quadratic_payment,     // index*q - t^2
    power_weighted,        // index*q^a - c*t, fixed 0 < a <= 1, c > 0
    piecewise_weighting,   // index = exponent d in [1/4,1/3]: theta_hat*q^d - t above
                           // the cutoff q_star, g(d)*q - t below, g affine increasing
    two_param_uv,          // index s <= 2: s*sqrt(q) - t^2;  s >= 2: 2*sqrt(q) - t^2/(s-1)
};

inline const char* family_kind_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::linear: return "linear";
        case FamilyKind::quadratic_payment: return "quadratic_payment";
        case FamilyKind::power_weighted: return "power_weighted";
        case FamilyKind::piecewise_weighting: return "piecewise_weighting";
        case FamilyKind::two_param_uv: return "two_param_uv";
    }
    return "unknown";
}

/// Family-specific fixed constants; unused entries keep their defaults.
struct FamilyConstants {
    double a = 1.0;          // power_weighted exponent
    double c = 1.0;          // power_weighted payment scale
    double theta_hat = 2.0;  // piecewise_weighting top valuation
    double q_star = 0.25;    // piecewise_weighting cutoff probability

    bool operator==(const FamilyConstants&) const = default;
};

namespace detail {

// Affine bijection [1/4, 1/3] -> [1/8, 1/2] for the piecewise-weighting slopes
// below the cutoff.
inline double piecewise_g(double d) { return 4.5 * d - 1.0; }

// two_param_uv utility coefficient on (1 - sqrt(q)); continuous across the
// branch junction at index 2.
inline double uv_coeff(double s) { return s <= 2.0 ? s : 2.0 * (s - 1.0); }

}  // namespace detail

class PreferenceFamily {
public:
    static Result<PreferenceFamily> make(FamilyKind kind, double param_lo, double param_hi,
                                         FamilyConstants constants = {});

    static Result<PreferenceFamily> linear(double lo, double hi) {
        return make(FamilyKind::linear, lo, hi);
    }
    static Result<PreferenceFamily> quadratic_payment(double lo, double hi) {
        return make(FamilyKind::quadratic_payment, lo, hi);
    }
    static Result<PreferenceFamily> power_weighted(double lo, double hi, double a, double c) {
        FamilyConstants k;
        k.a = a;
        k.c = c;
        return make(FamilyKind::power_weighted, lo, hi, k);
    }
    static Result<PreferenceFamily> piecewise_weighting(double lo, double hi, double theta_hat,
                                                        double q_star) {
        FamilyConstants k;
        k.theta_hat = theta_hat;
        k.q_star = q_star;
        return make(FamilyKind::piecewise_weighting, lo, hi, k);
    }
    static Result<PreferenceFamily> two_param_uv(double lo, double hi) {
        return make(FamilyKind::two_param_uv, lo, hi);
    }

    FamilyKind kind() const { return kind_; }
    double param_lo() const { return lo_; }
    double param_hi() const { return hi_; }
    const FamilyConstants& constants() const { return constants_; }

    bool contains_index(double s) const { return s >= lo_ && s <= hi_; }

    Result<Preference> preference(double index) const;

    /// Preference at an index already known to lie inside the bounds.
    Preference at(double index) const;

    /// Indifference label of z under the preference at `index`: the payment x
    /// with z indifferent to (x, 1). Smaller label = strictly preferred.
    double label(double index, const Bundle& z) const {
        switch (kind_) {
            case FamilyKind::linear:
                return z.t + index * (1.0 - z.q);
            case FamilyKind::quadratic_payment:
                return std::sqrt(z.t * z.t + index * (1.0 - z.q));
            case FamilyKind::power_weighted:
                return z.t + index * (1.0 - std::pow(z.q, constants_.a)) / constants_.c;
            case FamilyKind::piecewise_weighting: {
                const double th = constants_.theta_hat;
                const double qs = constants_.q_star;
                if (z.q >= qs) return z.t + th * (1.0 - std::pow(z.q, index));
                return z.t + detail::piecewise_g(index) * (qs - z.q) +
                       th * (1.0 - std::pow(qs, index));
            }
            case FamilyKind::two_param_uv:
                return std::sqrt(z.t * z.t + detail::uv_coeff(index) * (1.0 - std::sqrt(z.q)));
        }
        return 0.0;
    }

    /// Payment x with (x, q) on the indifference curve carrying `label`, or an
    /// error when that curve has already exited the bundle space at q.
    Result<double> payment_at(double index, double label, double q) const {
        double t = 0.0;
        switch (kind_) {
            case FamilyKind::linear:
                t = label - index * (1.0 - q);
                break;
            case FamilyKind::quadratic_payment: {
                const double tt = label * label - index * (1.0 - q);
                if (tt < 0.0) return exits_domain(label, q);
                return std::sqrt(tt);
            }
            case FamilyKind::power_weighted:
                t = label - index * (1.0 - std::pow(q, constants_.a)) / constants_.c;
                break;
            case FamilyKind::piecewise_weighting: {
                const double th = constants_.theta_hat;
                const double qs = constants_.q_star;
                if (q >= qs) {
                    t = label - th * (1.0 - std::pow(q, index));
                } else {
                    t = label - th * (1.0 - std::pow(qs, index)) -
                        detail::piecewise_g(index) * (qs - q);
                }
                break;
            }
            case FamilyKind::two_param_uv: {
                const double tt = label * label - detail::uv_coeff(index) * (1.0 - std::sqrt(q));
                if (tt < 0.0) return exits_domain(label, q);
                return std::sqrt(tt);
            }
        }
        if (t < 0.0) return exits_domain(label, q);
        return t;
    }

    bool operator==(const PreferenceFamily& other) const {
        return kind_ == other.kind_ && lo_ == other.lo_ && hi_ == other.hi_ &&
               constants_ == other.constants_;
    }

private:
    PreferenceFamily(FamilyKind kind, double lo, double hi, FamilyConstants k)
        : kind_(kind), lo_(lo), hi_(hi), constants_(k) {}

    static Result<double> exits_domain(double label, double q) {
        return fail<double>(Errc::chain_unsolvable,
                            "indifference curve with label " + std::to_string(label) +
                                " has no nonnegative payment at q=" + std::to_string(q));
    }

    FamilyKind kind_;
    double lo_, hi_;
    FamilyConstants constants_;
};

/// One preference from a family: the family plus its scalar order index.
/// Carries its own copy of the family, so it stays valid on its own.
class Preference {
public:
    Preference(const PreferenceFamily& family, double index) : family_(family), index_(index) {}

    const PreferenceFamily& family() const { return family_; }
    double index() const { return index_; }

    double label(const Bundle& z) const { return family_.label(index_, z); }

    Result<double> payment_at(double label, double q) const {
        return family_.payment_at(index_, label, q);
    }

    /// Payment T with (0,0) indifferent to (T, 1).
    double reserve_payment() const { return label(Bundle{0.0, 0.0}); }

private:
    PreferenceFamily family_;
    double index_;
};

inline Result<Preference> PreferenceFamily::preference(double index) const {
    if (!contains_index(index)) {
        return fail<Preference>(Errc::out_of_range,
                                "index " + std::to_string(index) + " outside [" +
                                    std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }
    return Preference(*this, index);
}

inline Preference PreferenceFamily::at(double index) const { return Preference(*this, index); }

/// Upper payment bound for label searches: ten times the top preference's
/// reserve payment. Labels of bundles reachable by chains from (0,0) never
/// exceed the top reserve itself.
inline double label_window(const PreferenceFamily& fam) {
    return 10.0 * fam.at(fam.param_hi()).reserve_payment();
}

/// Bisection route to the indifference label, independent of the closed forms.
/// Utility is strictly decreasing in payment, so the bracket [0, window] pins
/// the root whenever it contains one.
inline Result<double> label_by_bisection(const Preference& pref, const Bundle& z,
                                         double window = -1.0, double tol = 1e-9) {
    if (window <= 0.0) window = label_window(pref.family());
    const double target = pref.label(z);
    auto at_top = [&](double x) { return pref.label(Bundle{x, 1.0}); };
    double lo = 0.0, hi = window;
    if (at_top(hi) < target) {
        return fail<double>(Errc::unbounded_label,
                            "bundle worse than every (t,1) with t in [0, " +
                                std::to_string(window) + "]");
    }
    if (at_top(lo) >= target) return lo;
    for (int iter = 0; iter < 200 && hi - lo > tol * 0.5; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (at_top(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double indiff_label(const Preference& pref, const Bundle& z) { return pref.label(z); }

enum class Comparison { a_better, b_better, indifferent };

/// Label comparison of two bundles under one preference.
inline Comparison prefers(const Preference& pref, const Bundle& a, const Bundle& b,
                          double tol = 1e-9) {
    const double la = pref.label(a);
    const double lb = pref.label(b);
    if (la < lb - tol) return Comparison::a_better;
    if (lb < la - tol) return Comparison::b_better;
    return Comparison::indifferent;
}

/// The family preference indifferent between two diagonal bundles, found by
/// bisection on the order index; the label difference is strictly monotone in
/// the index because order is preserved over diagonal pairs.
inline Result<Preference> indiff_through(const PreferenceFamily& fam, const Bundle& a,
                                         const Bundle& b, double tol = 1e-9) {
    if (!diagonal(a, b)) {
        return fail<Preference>(Errc::not_diagonal, "bundles are not strictly diagonal");
    }
    const Bundle& low = strictly_below(a, b) ? a : b;
    const Bundle& high = strictly_below(a, b) ? b : a;
    // d(s) = label_s(high) - label_s(low), strictly decreasing in s.
    auto d = [&](double s) { return fam.label(s, high) - fam.label(s, low); };
    double lo = fam.param_lo(), hi = fam.param_hi();
    const double dlo = d(lo), dhi = d(hi);
    if (dlo == 0.0) return fam.at(lo);
    if (dhi == 0.0) return fam.at(hi);
    if (dlo < 0.0 || dhi > 0.0) {
        return fail<Preference>(Errc::out_of_range,
                                "indifference index falls outside the family bounds");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double dm = d(mid);
        if (std::abs(dm) <= tol * 1e-3 || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) {
            return fam.at(mid);
        }
        (dm > 0.0 ? lo : hi) = mid;
    }
    return fam.at(0.5 * (lo + hi));
}

/// Reserve payment T with (0,0) indifferent to (T,1) under `pref`.
inline double reserve_payment(const Preference& pref) { return pref.reserve_payment(); }

/// Single-crossing order of two preferences from the same family.
inline Result<std::strong_ordering> compare_prefs(const Preference& p1, const Preference& p2) {
    if (!(p1.family() == p2.family())) {
        return fail<std::strong_ordering>(Errc::family_mismatch,
                                          "preferences belong to different families");
    }
    if (p1.index() < p2.index()) return std::strong_ordering::less;
    if (p1.index() > p2.index()) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

namespace detail {

// Construction-time probe: labels must grow pointwise with the order index
// (strictly so away from q = 1), the finite stand-in for "cuts from above".
inline bool order_probe_passes(const PreferenceFamily& fam) {
    const double lo = fam.param_lo(), hi = fam.param_hi();
    std::array<double, 5> indices{lo, lo + 0.25 * (hi - lo), 0.5 * (lo + hi),
                                  hi - 0.25 * (hi - lo), hi};
    const double t_hi = fam.label(hi, Bundle{0.0, 0.0});
    std::array<double, 4> ts{0.0, 0.2 * t_hi, 0.6 * t_hi, 1.1 * t_hi};
    std::array<double, 5> qs{0.0, 0.2, 0.5, 0.8, 1.0};
    for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
        for (double t : ts) {
            for (double q : qs) {
                const Bundle z{t, q};
                const double l1 = fam.label(indices[i], z);
                const double l2 = fam.label(indices[i + 1], z);
                if (l2 < l1 - 1e-12) return false;
                if (q <= 0.8 && !(l2 > l1)) return false;
            }
        }
    }
    return true;
}

}  // namespace detail

inline Result<PreferenceFamily> PreferenceFamily::make(FamilyKind kind, double param_lo,
                                                       double param_hi,
                                                       FamilyConstants constants) {
    auto invalid = [](std::string msg) {
        return fail<PreferenceFamily>(Errc::invalid_family, std::move(msg));
    };
    if (!std::isfinite(param_lo) || !std::isfinite(param_hi) || !(param_lo < param_hi)) {
        return invalid("requires param_lo < param_hi, both finite");
    }
    switch (kind) {
        case FamilyKind::linear:
        case FamilyKind::quadratic_payment:
            if (param_lo < 0.0) return invalid("order index must be nonnegative");
            break;
        case FamilyKind::power_weighted:
            if (param_lo < 0.0) return invalid("order index must be nonnegative");
            if (!(constants.a > 0.0 && constants.a <= 1.0)) return invalid("requires 0 < a <= 1");
            if (!(constants.c > 0.0)) return invalid("requires c > 0");
            break;
        case FamilyKind::piecewise_weighting: {
            if (param_lo < 0.25 - 1e-12 || param_hi > 1.0 / 3.0 + 1e-12) {
                return invalid("exponent bounds must lie inside [1/4, 1/3]");
            }
            if (!(constants.theta_hat > 0.0)) return invalid("requires theta_hat > 0");
            // q_star must exceed exp(-3) so the curvature ordering holds on
            // [q_star, 1] for every exponent in [1/4, 1/3].
            if (!(constants.q_star > std::exp(-3.0) && constants.q_star < 1.0)) {
                return invalid("requires exp(-3) < q_star < 1");
            }
            break;
        }
        case FamilyKind::two_param_uv:
            if (param_lo < 0.0) return invalid("order index must be nonnegative");
            break;
    }
    PreferenceFamily fam(kind, param_lo, param_hi, constants);
    if (!detail::order_probe_passes(fam)) {
        return invalid("order probe failed: labels not monotone in the index");
    }
    return fam;
}

/// The construction-time order probe, exposed for tests.
inline bool order_probe(const PreferenceFamily& fam) { return detail::order_probe_passes(fam); }

}  // namespace scmech
