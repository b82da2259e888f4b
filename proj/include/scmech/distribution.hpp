#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scmech/error.hpp"
#include "scmech/preference.hpp"

namespace scmech {

enum class DistKind {
    uniform,
    affine_cdf,             // Gamma(x) = (x - a) / (b - a); same law as uniform
    truncated_exponential,  // rate lambda, renormalized on the support
    piecewise_linear_cdf,
};

inline const char* dist_kind_name(DistKind k) {
    switch (k) {
        case DistKind::uniform: return "uniform";
        case DistKind::affine_cdf: return "affine_cdf";
        case DistKind::truncated_exponential: return "truncated_exponential";
        case DistKind::piecewise_linear_cdf: return "piecewise_linear_cdf";
    }
    return "unknown";
}

/// Atomless probability measure over the order-index line.
class TypeDistribution {
public:
    static Result<TypeDistribution> uniform(double lo, double hi) {
        return make_simple(DistKind::uniform, lo, hi, 0.0);
    }
    static Result<TypeDistribution> affine(double lo, double hi) {
        return make_simple(DistKind::affine_cdf, lo, hi, 0.0);
    }
    static Result<TypeDistribution> truncated_exponential(double lo, double hi, double rate) {
        if (!(rate > 0.0)) {
            return fail<TypeDistribution>(Errc::config_invalid, "requires rate > 0");
        }
        return make_simple(DistKind::truncated_exponential, lo, hi, rate);
    }

    /// Knots (x_i, F_i): x strictly increasing, F nondecreasing from 0 to 1.
    static Result<TypeDistribution> piecewise_linear(std::vector<double> xs,
                                                     std::vector<double> fs) {
        auto bad = [](std::string m) { return fail<TypeDistribution>(Errc::config_invalid, m); };
        if (xs.size() != fs.size() || xs.size() < 2) return bad("needs >= 2 knots");
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            if (!(xs[i] < xs[i + 1])) return bad("knot positions must be strictly increasing");
            if (fs[i + 1] < fs[i]) return bad("knot CDF values must be nondecreasing");
        }
        if (fs.front() != 0.0 || fs.back() != 1.0) return bad("CDF must run from 0 to 1");
        TypeDistribution d(DistKind::piecewise_linear_cdf, xs.front(), xs.back(), 0.0);
        d.knot_x_ = std::move(xs);
        d.knot_f_ = std::move(fs);
        if (!d.density_integrates()) return bad("density does not integrate to 1");
        return d;
    }

    DistKind kind() const { return kind_; }
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    double rate() const { return rate_; }
    const std::vector<double>& knot_x() const { return knot_x_; }
    const std::vector<double>& knot_f() const { return knot_f_; }

    Result<double> cdf(double x) const {
        if (!in_support(x)) return outside(x);
        return cdf_unchecked(x);
    }

    Result<double> density(double x) const {
        if (!in_support(x)) return outside(x);
        return density_unchecked(x);
    }

    /// Mass Gamma(hi) - Gamma(lo) of the interval; atomless, so endpoint
    /// inclusion is immaterial.
    Result<double> interval_mass(double lo, double hi) const {
        if (hi < lo) return fail<double>(Errc::reversed_interval, "requires lo <= hi");
        if (!in_support(lo) || !in_support(hi)) return outside(hi < lo_ ? hi : lo);
        return cdf_unchecked(hi) - cdf_unchecked(lo);
    }

    /// Hazard rate gamma(x) / (1 - Gamma(x)); undefined where Gamma = 1.
    Result<double> hazard(double x) const {
        if (!in_support(x)) return outside(x);
        const double g = cdf_unchecked(x);
        if (g >= 1.0 - 1e-15) {
            return fail<double>(Errc::divide_at_top, "hazard undefined where the CDF reaches 1");
        }
        return density_unchecked(x) / (1.0 - g);
    }

    /// Nondecreasing hazard on a grid of `grid_n` points below the top, with
    /// absolute slack 1e-9.
    bool is_monotone_hazard(int grid_n = 200) const {
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid_n; ++i) {
            const double x = lo_ + (hi_ - lo_) * static_cast<double>(i) / grid_n;
            auto h = hazard(x);
            if (!h.ok()) continue;
            if (*h < prev - 1e-9) return false;
            prev = *h;
        }
        return true;
    }

    /// Virtual valuation psi(x) = x - (1 - Gamma(x)) / gamma(x).
    Result<double> virtual_value(double x) const {
        if (!in_support(x)) return outside(x);
        const double g = density_unchecked(x);
        if (!(g > 0.0)) {
            return fail<double>(Errc::zero_density, "virtual value needs positive density");
        }
        return x - (1.0 - cdf_unchecked(x)) / g;
    }

    /// Inverse CDF; u outside [0,1] is clamped.
    double quantile(double u) const {
        u = std::clamp(u, 0.0, 1.0);
        switch (kind_) {
            case DistKind::uniform:
            case DistKind::affine_cdf:
                return lo_ + u * (hi_ - lo_);
            case DistKind::truncated_exponential: {
                const double z = 1.0 - std::exp(-rate_ * (hi_ - lo_));
                return lo_ - std::log(1.0 - u * z) / rate_;
            }
            case DistKind::piecewise_linear_cdf: {
                auto it = std::lower_bound(knot_f_.begin(), knot_f_.end(), u);
                if (it == knot_f_.begin()) return knot_x_.front();
                std::size_t i = static_cast<std::size_t>(it - knot_f_.begin());
                if (i >= knot_f_.size()) return knot_x_.back();
                const double f0 = knot_f_[i - 1], f1 = knot_f_[i];
                if (f1 <= f0) return knot_x_[i];
                const double w = (u - f0) / (f1 - f0);
                return knot_x_[i - 1] + w * (knot_x_[i] - knot_x_[i - 1]);
            }
        }
        return lo_;
    }

    bool operator==(const TypeDistribution& other) const = default;

private:
    TypeDistribution(DistKind kind, double lo, double hi, double rate)
        : kind_(kind), lo_(lo), hi_(hi), rate_(rate) {}

    static Result<TypeDistribution> make_simple(DistKind kind, double lo, double hi, double rate) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
            return fail<TypeDistribution>(Errc::config_invalid,
                                          "requires support_lo < support_hi, both finite");
        }
        return TypeDistribution(kind, lo, hi, rate);
    }

    bool in_support(double x) const { return x >= lo_ && x <= hi_; }

    Result<double> outside(double x) const {
        return fail<double>(Errc::out_of_support, "point " + std::to_string(x) +
                                                      " outside support [" + std::to_string(lo_) +
                                                      ", " + std::to_string(hi_) + "]");
    }

    double cdf_unchecked(double x) const {
        switch (kind_) {
            case DistKind::uniform:
            case DistKind::affine_cdf:
                return (x - lo_) / (hi_ - lo_);
            case DistKind::truncated_exponential: {
                const double z = 1.0 - std::exp(-rate_ * (hi_ - lo_));
                return (1.0 - std::exp(-rate_ * (x - lo_))) / z;
            }
            case DistKind::piecewise_linear_cdf: {
                auto it = std::upper_bound(knot_x_.begin(), knot_x_.end(), x);
                std::size_t i = static_cast<std::size_t>(it - knot_x_.begin());
                if (i == 0) return 0.0;
                if (i >= knot_x_.size()) return 1.0;
                const double w = (x - knot_x_[i - 1]) / (knot_x_[i] - knot_x_[i - 1]);
                return knot_f_[i - 1] + w * (knot_f_[i] - knot_f_[i - 1]);
            }
        }
        return 0.0;
    }

    // Left-derivative of the CDF at interior knots; right-derivative at the
    // bottom of the support.
    double density_unchecked(double x) const {
        switch (kind_) {
            case DistKind::uniform:
            case DistKind::affine_cdf:
                return 1.0 / (hi_ - lo_);
            case DistKind::truncated_exponential: {
                const double z = 1.0 - std::exp(-rate_ * (hi_ - lo_));
                return rate_ * std::exp(-rate_ * (x - lo_)) / z;
            }
            case DistKind::piecewise_linear_cdf: {
                // lower_bound lands on the segment end, giving the left slope
                // at interior knots and the right slope at the bottom.
                auto it = std::lower_bound(knot_x_.begin(), knot_x_.end(), x);
                std::size_t i = static_cast<std::size_t>(it - knot_x_.begin());
                if (i == 0) i = 1;
                if (i >= knot_x_.size()) i = knot_x_.size() - 1;
                return (knot_f_[i] - knot_f_[i - 1]) / (knot_x_[i] - knot_x_[i - 1]);
            }
        }
        return 0.0;
    }

    // Trapezoid check per continuity piece of the density.
    bool density_integrates() const {
        double total = 0.0;
        const std::size_t pieces = knot_x_.empty() ? 1 : knot_x_.size() - 1;
        for (std::size_t p = 0; p < pieces; ++p) {
            const double a = knot_x_.empty() ? lo_ : knot_x_[p];
            const double b = knot_x_.empty() ? hi_ : knot_x_[p + 1];
            const int n = 64;
            double acc = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double x = a + (b - a) * static_cast<double>(i) / n;
                const double w = (i == 0 || i == n) ? 0.5 : 1.0;
                // sample just inside the piece so knot discontinuities do not bleed in
                const double xs = std::clamp(x, std::nextafter(a, b), std::nextafter(b, a));
                acc += w * density_unchecked(xs);
            }
            total += acc * (b - a) / n;
        }
        return std::abs(total - 1.0) <= 1e-6;
    }

    DistKind kind_;
    double lo_, hi_;
    double rate_;
    std::vector<double> knot_x_, knot_f_;
};

/// One behavioral slice of a union domain: a family, its type distribution,
/// and the probability of the slice.
struct Slice {
    PreferenceFamily family;
    TypeDistribution dist;
    double weight;
};

struct SliceMixture {
    std::vector<Slice> slices;

    static Result<SliceMixture> make(std::vector<Slice> slices) {
        if (slices.empty()) {
            return fail<SliceMixture>(Errc::config_invalid, "mixture needs at least one slice");
        }
        double total = 0.0;
        for (const auto& s : slices) {
            if (s.weight < 0.0) {
                return fail<SliceMixture>(Errc::config_invalid, "weights must be nonnegative");
            }
            total += s.weight;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            return fail<SliceMixture>(Errc::config_invalid, "weights must sum to 1");
        }
        return SliceMixture{std::move(slices)};
    }
};

}  // namespace scmech
