#pragma once

#include <cmath>

namespace scmech {

/// A consumption bundle: payment `t` (nonnegative) and win probability `q` in [0,1].
struct Bundle {
    double t = 0.0;
    double q = 0.0;

    bool valid() const {
        return std::isfinite(t) && t >= 0.0 && q >= 0.0 && q <= 1.0;
    }

    bool operator==(const Bundle& other) const = default;
};

/// Componentwise strict order: both payment and win probability larger.
inline bool strictly_below(const Bundle& a, const Bundle& b) {
    return a.t < b.t && a.q < b.q;
}

/// Two bundles are diagonal when both coordinates are strictly ordered the same way.
inline bool diagonal(const Bundle& a, const Bundle& b) {
    return strictly_below(a, b) || strictly_below(b, a);
}

inline bool approx_equal(const Bundle& a, const Bundle& b, double tol) {
    return std::abs(a.t - b.t) <= tol && std::abs(a.q - b.q) <= tol;
}

}  // namespace scmech
