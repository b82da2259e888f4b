#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "scmech/distribution.hpp"
#include "scmech/error.hpp"
#include "scmech/mechanism.hpp"
#include "scmech/preference.hpp"
#include "scmech/rng.hpp"
#include "scmech/verifier.hpp"

namespace scmech {

/// Payments that close the indifference chain: t0 = 0, and each t[k] puts
/// (t[k], q[k]) on the threshold preference's curve through (t[k-1], q[k-1]).
///
/// `probabilities` carries the full tuple including q0 = 0; `thresholds` has
/// one entry fewer. Both must be nondecreasing.
inline Result<std::vector<double>> chain_payments(const PreferenceFamily& family,
                                                  const std::vector<double>& thresholds,
                                                  const std::vector<double>& probabilities) {
    if (probabilities.empty() || thresholds.size() + 1 != probabilities.size()) {
        return fail<std::vector<double>>(Errc::config_invalid,
                                         "need one threshold between adjacent probabilities");
    }
    if (probabilities.front() != 0.0) {
        return fail<std::vector<double>>(Errc::config_invalid, "q0 must be 0");
    }
    std::vector<double> payments(probabilities.size(), 0.0);
    for (std::size_t k = 1; k < probabilities.size(); ++k) {
        if (probabilities[k] == probabilities[k - 1]) {
            // same win probability: indifference pins the same payment
            payments[k] = payments[k - 1];
            continue;
        }
        const double s = thresholds[k - 1];
        const double label = family.label(s, Bundle{payments[k - 1], probabilities[k - 1]});
        auto t = family.payment_at(s, label, probabilities[k]);
        if (!t.ok()) {
            return fail<std::vector<double>>(Errc::chain_unsolvable, t.error().message);
        }
        if (*t > label_window(family)) {
            return fail<std::vector<double>>(Errc::chain_unsolvable,
                                             "chained payment exceeds the search window");
        }
        payments[k] = std::max(*t, payments[k - 1]);
    }
    return payments;
}

/// Expected revenue of the geometry induced by (thresholds, probabilities).
inline Result<double> objective(const PreferenceFamily& family, const TypeDistribution& dist,
                                const std::vector<double>& thresholds,
                                const std::vector<double>& probabilities) {
    auto payments = chain_payments(family, thresholds, probabilities);
    if (!payments.ok()) return payments.error();
    const std::size_t l = probabilities.size();
    double total = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
        const double lo = (k == 0) ? dist.support_lo() : thresholds[k - 1];
        const double hi = (k == l - 1) ? dist.support_hi() : thresholds[k];
        auto mass = dist.interval_mass(lo, hi);
        if (!mass.ok()) return mass.error();
        total += (*payments)[k] * *mass;
    }
    return total;
}

struct StartOutcome {
    int start = 0;
    std::string kind;  // "warm", "stratified", "coarse"
    double objective = 0.0;
};

/// Decision variables of the finite-range program plus the verified mechanism.
struct SolveSolution {
    std::vector<double> payments;
    std::vector<double> probabilities;
    std::vector<double> thresholds;
    double objective = 0.0;
    StepMechanism mechanism;  // canonical collapsed form
    std::vector<double> foc_residuals;
    VerificationReport verification;
    std::vector<StartOutcome> starts;
};

struct GridSpec {
    int theta_points = 61;
    int q_points = 61;
    std::uint64_t max_evals = 50'000'000;
};

struct SolveOptions {
    int starts = 32;
    int refine_budget = 10'000;
    std::uint64_t seed = 1;
    double cell_merge_tol = 1e-6;
    int verify_grid = 400;
    double verify_tol = 1e-7;
    bool coarse_seed = true;      // seed refinement with the best coarse grid points
    int coarse_points = 7;
    bool oracle_compare = false;  // cross-check the incumbent against the grid oracle
    GridSpec oracle_grid{};
    std::vector<std::vector<double>> extra_starts;  // raw increment vectors
};

namespace detail {

// Raw solver variables: nonnegative increments for thresholds and win
// probabilities; cumulative sums with clamping keep every point feasible.
struct IncrementSpace {
    double lo, hi;
    std::size_t cells;  // l - 1

    std::size_t dim() const { return 2 * cells; }

    void decode(const std::vector<double>& v, std::vector<double>& thresholds,
                std::vector<double>& probabilities) const {
        thresholds.assign(cells, 0.0);
        probabilities.assign(cells + 1, 0.0);
        double th = lo;
        double q = 0.0;
        for (std::size_t k = 0; k < cells; ++k) {
            th = std::min(hi, th + std::max(0.0, v[k]));
            q = std::min(1.0, q + std::max(0.0, v[cells + k]));
            thresholds[k] = th;
            probabilities[k + 1] = q;
        }
    }

    std::vector<double> encode(const std::vector<double>& thresholds,
                               const std::vector<double>& probabilities) const {
        std::vector<double> v(dim(), 0.0);
        double prev_th = lo, prev_q = 0.0;
        for (std::size_t k = 0; k < cells; ++k) {
            v[k] = thresholds[k] - prev_th;
            v[cells + k] = probabilities[k + 1] - prev_q;
            prev_th = thresholds[k];
            prev_q = probabilities[k + 1];
        }
        return v;
    }
};

// Nondecreasing tuple enumeration for the brute-force oracle: combinations
// with repetition out of `points`, visited in lexicographic order.
class MonotoneTuples {
public:
    MonotoneTuples(std::size_t points, std::size_t length)
        : points_(points), idx_(length, 0), done_(length == 0 || points == 0) {}

    bool done() const { return done_; }
    const std::vector<std::size_t>& indices() const { return idx_; }

    void advance() {
        for (std::size_t k = idx_.size(); k-- > 0;) {
            if (idx_[k] + 1 < points_) {
                const std::size_t next = idx_[k] + 1;
                for (std::size_t j = k; j < idx_.size(); ++j) idx_[j] = next;
                return;
            }
        }
        done_ = true;
    }

private:
    std::size_t points_;
    std::vector<std::size_t> idx_;
    bool done_;
};

inline std::uint64_t tuples_with_repetition(std::uint64_t points, std::uint64_t length) {
    // C(points + length - 1, length), saturating
    long double acc = 1.0L;
    for (std::uint64_t i = 0; i < length; ++i) {
        acc = acc * static_cast<long double>(points + i) / static_cast<long double>(i + 1);
        if (acc > 1e18L) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(acc);
}

// Lexicographically smaller (thresholds, probabilities) wins objective ties,
// keeping the incumbent reduction order-independent.
inline bool lexicographically_before(const std::vector<double>& th_a,
                                     const std::vector<double>& q_a,
                                     const std::vector<double>& th_b,
                                     const std::vector<double>& q_b) {
    if (th_a != th_b) return th_a < th_b;
    return q_a < q_b;
}

// Grid scan, golden section around the best grid point, then a parabolic
// polish. Golden section stalls within sqrt(eps) of a smooth maximum because
// function differences underflow; the fitted vertex is accepted whenever it
// does not measurably lose value. Endpoints compete exactly, so boundary
// maxima come out bit-exact.
template <typename Fn>
double maximize_1d(const Fn& f, double lo, double hi, int scan_points = 2001) {
    double best_x = lo, best_f = f(lo);
    auto consider = [&](double x) {
        if (x < lo || x > hi) return;
        const double fx = f(x);
        if (fx > best_f || (fx == best_f && x < best_x)) {
            best_f = fx;
            best_x = x;
        }
    };
    const double step = (hi - lo) / (scan_points - 1);
    for (int i = 1; i < scan_points; ++i) consider(lo + step * i);

    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int iter = 0; iter < 120 && b - a > 1e-12; ++iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    consider(0.5 * (a + b));

    const double h = 1e-5;
    if (best_x - h >= lo && best_x + h <= hi) {
        const double fm = f(best_x), fp = f(best_x + h), fn = f(best_x - h);
        const double denom = fp - 2.0 * fm + fn;
        if (denom < 0.0) {
            const double vertex = best_x - 0.5 * h * (fp - fn) / denom;
            if (vertex >= lo && vertex <= hi &&
                f(vertex) >= best_f - 1e-12 * std::max(1.0, std::abs(best_f))) {
                best_x = vertex;
            }
        }
    }
    return best_x;
}

}  // namespace detail

/// One-dimensional posted-price optimum: maximizes reserve(theta) * (1 -
/// Gamma(theta)) and returns the two-bundle sell-or-not mechanism.
inline Result<SolveSolution> deterministic_optimal(const PreferenceFamily& family,
                                                   const TypeDistribution& dist,
                                                   int scan_points = 2001) {
    if (std::abs(dist.support_lo() - family.param_lo()) > 1e-12 ||
        std::abs(dist.support_hi() - family.param_hi()) > 1e-12) {
        return fail<SolveSolution>(Errc::support_mismatch,
                                   "distribution support must equal the family index bounds");
    }
    const double lo = family.param_lo(), hi = family.param_hi();
    auto revenue = [&](double th) {
        const double mass = 1.0 - dist.cdf(th).value_or(1.0);
        return family.label(th, Bundle{0.0, 0.0}) * mass;
    };
    const double best_x = detail::maximize_1d(revenue, lo, hi, scan_points);
    const double best_f = revenue(best_x);
    const double t_star = family.label(best_x, Bundle{0.0, 0.0});
    auto mech = StepMechanism::build_from_geometry(family, {Bundle{0.0, 0.0}, Bundle{t_star, 1.0}},
                                                   {best_x});
    if (!mech.ok()) return mech.error();
    SolveSolution sol{
        {0.0, t_star}, {0.0, 1.0}, {best_x}, best_f, *mech, {}, {}, {}};
    sol.verification = verify_mechanism(*mech);
    return sol;
}

/// Exhaustive maximum of the finite-range program over a product grid of
/// nondecreasing threshold and probability tuples.
inline Result<SolveSolution> brute_force_oracle(const PreferenceFamily& family,
                                                const TypeDistribution& dist, int l,
                                                GridSpec grid = {}) {
    if (l < 2) return fail<SolveSolution>(Errc::config_invalid, "l must be at least 2");
    const std::size_t cells = static_cast<std::size_t>(l) - 1;
    const long double combos =
        static_cast<long double>(
            detail::tuples_with_repetition(static_cast<std::uint64_t>(grid.theta_points), cells)) *
        static_cast<long double>(
            detail::tuples_with_repetition(static_cast<std::uint64_t>(grid.q_points), cells));
    if (combos > static_cast<long double>(grid.max_evals)) {
        return fail<SolveSolution>(Errc::grid_too_large,
                                   "enumeration budget exceeded (" +
                                       std::to_string(grid.max_evals) + " evaluations)");
    }
    const double lo = family.param_lo(), hi = family.param_hi();
    std::vector<double> theta_grid(grid.theta_points), q_grid(grid.q_points);
    for (int i = 0; i < grid.theta_points; ++i) {
        theta_grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid.theta_points - 1);
    }
    for (int i = 0; i < grid.q_points; ++i) {
        q_grid[i] = static_cast<double>(i) / (grid.q_points - 1);
    }

    double best = -1.0;
    std::vector<double> best_th, best_q;
    std::vector<double> th(cells), q(cells + 1, 0.0);
    for (detail::MonotoneTuples ti(theta_grid.size(), cells); !ti.done(); ti.advance()) {
        for (std::size_t k = 0; k < cells; ++k) th[k] = theta_grid[ti.indices()[k]];
        for (detail::MonotoneTuples qi(q_grid.size(), cells); !qi.done(); qi.advance()) {
            for (std::size_t k = 0; k < cells; ++k) q[k + 1] = q_grid[qi.indices()[k]];
            auto value = objective(family, dist, th, q);
            if (!value.ok()) continue;
            if (*value > best ||
                (*value == best && detail::lexicographically_before(th, q, best_th, best_q))) {
                best = *value;
                best_th = th;
                best_q = q;
            }
        }
    }
    if (best_th.empty()) {
        return fail<SolveSolution>(Errc::grid_too_large, "empty enumeration");
    }
    auto payments = chain_payments(family, best_th, best_q);
    if (!payments.ok()) return payments.error();
    std::vector<Bundle> bundles;
    for (std::size_t k = 0; k < best_q.size(); ++k) {
        bundles.push_back(Bundle{(*payments)[k], best_q[k]});
    }
    auto mech = StepMechanism::build_from_geometry(family, bundles, best_th, 1e-6);
    if (!mech.ok()) return mech.error();
    auto merged = collapse(*mech);
    if (!merged.ok()) return merged.error();
    SolveSolution sol{*payments, best_q, best_th, best, *merged, {}, {}, {}};
    sol.verification = verify_mechanism(*merged);
    return sol;
}

/// First-order stationarity residuals for linear preferences: hazard at each
/// effective threshold minus the probability-to-payment slope of its step.
inline Result<std::vector<double>> foc_residuals(const StepMechanism& mech,
                                                 const TypeDistribution& dist) {
    if (mech.family().kind() != FamilyKind::linear) {
        return fail<std::vector<double>>(Errc::family_unsupported,
                                         "first-order residuals apply to linear preferences");
    }
    std::vector<double> residuals;
    const auto& bundles = mech.bundles();
    const auto& th = mech.thresholds();
    for (std::size_t k = 0; k < th.size(); ++k) {
        const double dt = bundles[k + 1].t - bundles[k].t;
        const double dq = bundles[k + 1].q - bundles[k].q;
        if (dt == 0.0) {
            return fail<std::vector<double>>(Errc::degenerate_cell,
                                             "zero payment step at a threshold");
        }
        auto h = dist.hazard(th[k]);
        if (!h.ok()) return h.error();
        residuals.push_back(*h - dq / dt);
    }
    return residuals;
}

inline Result<std::vector<double>> foc_residuals(const SolveSolution& sol,
                                                 const TypeDistribution& dist) {
    return foc_residuals(sol.mechanism, dist);
}

/// Multi-start direct search for the finite-range optimal mechanism.
///
/// Deterministic given the seed: stratified Halton starts, the posted-price
/// warm start, optional coarse-grid seeds, then coordinatewise pattern
/// refinement in the increment parameterization (every iterate feasible).
inline Result<SolveSolution> solve_optimal(const PreferenceFamily& family,
                                           const TypeDistribution& dist, int l,
                                           SolveOptions options = {}) {
    if (l < 2) return fail<SolveSolution>(Errc::config_invalid, "l must be at least 2");
    if (std::abs(dist.support_lo() - family.param_lo()) > 1e-12 ||
        std::abs(dist.support_hi() - family.param_hi()) > 1e-12) {
        return fail<SolveSolution>(Errc::support_mismatch,
                                   "distribution support must equal the family index bounds");
    }
    const std::size_t cells = static_cast<std::size_t>(l) - 1;
    const detail::IncrementSpace space{family.param_lo(), family.param_hi(), cells};
    const double range = family.param_hi() - family.param_lo();

    std::vector<double> th, q;
    auto eval = [&](const std::vector<double>& v) {
        space.decode(v, th, q);
        auto value = objective(family, dist, th, q);
        return value.ok() ? *value : -std::numeric_limits<double>::infinity();
    };

    struct Candidate {
        std::vector<double> v;
        std::string kind;
    };
    std::vector<Candidate> starts;

    // warm start from the posted-price optimum
    auto det = deterministic_optimal(family, dist);
    if (det.ok()) {
        std::vector<double> warm(space.dim(), 0.0);
        warm[0] = det->thresholds[0] - family.param_lo();
        warm[space.dim() - 1] = 1.0;  // all win probability in the last step
        starts.push_back({warm, "warm"});
    }

    // stratified low-discrepancy starts, rotated by the seed
    std::uint64_t sm = options.seed;
    std::vector<double> rotation(space.dim());
    for (auto& r : rotation) {
        r = static_cast<double>(splitmix64(sm) >> 11) * 0x1.0p-53;
    }
    for (int s = 0; s < options.starts; ++s) {
        std::vector<double> v(space.dim());
        for (std::size_t d = 0; d < space.dim(); ++d) {
            double u = halton(static_cast<std::uint64_t>(s), d) + rotation[d];
            u -= std::floor(u);
            v[d] = (d < cells) ? u * range / static_cast<double>(cells)
                               : u / static_cast<double>(cells);
        }
        starts.push_back({v, "stratified"});
    }

    // coarse exhaustive seeds
    if (options.coarse_seed) {
        GridSpec coarse{options.coarse_points, options.coarse_points, 2'000'000};
        auto seed_sol = brute_force_oracle(family, dist, l, coarse);
        if (seed_sol.ok()) {
            starts.push_back(
                {space.encode(seed_sol->thresholds, seed_sol->probabilities), "coarse"});
        }
    }
    for (const auto& v : options.extra_starts) {
        if (v.size() == space.dim()) starts.push_back({v, "extra"});
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> best_th, best_q;
    std::vector<StartOutcome> outcomes;

    for (std::size_t s = 0; s < starts.size(); ++s) {
        std::vector<double> v = starts[s].v;
        double fv = eval(v);
        // coordinatewise pattern search with shrinking steps
        double scale = 0.25;
        int evals = 1;
        while (evals < options.refine_budget && scale > 1e-11) {
            bool improved = false;
            for (std::size_t d = 0; d < space.dim() && evals < options.refine_budget; ++d) {
                const double width = (d < cells) ? range : 1.0;
                for (double sign : {+1.0, -1.0}) {
                    std::vector<double> w = v;
                    w[d] = std::max(0.0, std::min(width, w[d] + sign * scale * width));
                    if (w[d] == v[d]) continue;
                    const double fw = eval(w);
                    ++evals;
                    if (fw > fv) {
                        v = std::move(w);
                        fv = fw;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) scale *= 0.5;
        }
        space.decode(v, th, q);
        outcomes.push_back({static_cast<int>(s), starts[s].kind, fv});
        if (fv > best ||
            (fv == best && detail::lexicographically_before(th, q, best_th, best_q))) {
            best = fv;
            best_th = th;
            best_q = q;
        }
    }

    if (best_th.empty()) {
        return fail<SolveSolution>(Errc::solver_stalled, "no feasible start");
    }

    if (options.oracle_compare) {
        auto oracle = brute_force_oracle(family, dist, l, options.oracle_grid);
        if (oracle.ok() && oracle->objective > best + 1e-10) {
            return fail<SolveSolution>(
                Errc::solver_stalled,
                "refinement stalled below the oracle incumbent (solver " + std::to_string(best) +
                    " vs oracle " + std::to_string(oracle->objective) + ")");
        }
    }

    auto payments = chain_payments(family, best_th, best_q);
    if (!payments.ok()) return payments.error();
    std::vector<Bundle> bundles;
    for (std::size_t k = 0; k < best_q.size(); ++k) {
        bundles.push_back(Bundle{(*payments)[k], best_q[k]});
    }
    auto mech = StepMechanism::build_from_geometry(family, bundles, best_th, 1e-6);
    if (!mech.ok()) return mech.error();
    auto merged = collapse(*mech, options.cell_merge_tol);
    if (!merged.ok()) return merged.error();

    SolveSolution sol{*payments, best_q, best_th, best, *merged, {}, {}, std::move(outcomes)};
    sol.verification = verify_mechanism(*merged, options.verify_grid, options.verify_tol);
    if (family.kind() == FamilyKind::linear) {
        auto foc = foc_residuals(*merged, dist);
        if (foc.ok()) sol.foc_residuals = *foc;
    }
    return sol;
}

/// Encodes a (thresholds, probabilities) geometry as a raw increment vector
/// usable in SolveOptions::extra_starts; shorter geometries are padded by
/// repeating their last step, which leaves the induced mechanism unchanged.
inline std::vector<double> encode_start(const PreferenceFamily& family,
                                        std::vector<double> thresholds,
                                        std::vector<double> probabilities, int l) {
    const std::size_t cells = static_cast<std::size_t>(l) - 1;
    while (thresholds.size() < cells) thresholds.push_back(thresholds.back());
    while (probabilities.size() < cells + 1) probabilities.push_back(probabilities.back());
    const detail::IncrementSpace space{family.param_lo(), family.param_hi(), cells};
    return space.encode(thresholds, probabilities);
}

/// Per-slice optima of a union domain plus the cross-slice misreport scan on
/// the naive combination of those optima.
struct SliceSolution {
    SolveSolution deterministic;
    SolveSolution l_optimal;
};

struct CrossSliceViolation {
    std::size_t true_slice = 0;
    std::size_t menu_slice = 0;
    double true_index = 0.0;
    Bundle true_bundle;
    Bundle deviant_bundle;
    double utility_gap = 0.0;
};

struct UnionSliceReport {
    std::vector<SliceSolution> slices;
    std::vector<double> slice_revenues;
    double mixture_revenue = 0.0;
    bool combined_sp = true;
    std::vector<CrossSliceViolation> violations;
};

inline Result<UnionSliceReport> union_slice_analysis(const SliceMixture& mixture, int l,
                                                     SolveOptions options = {}, int grid_n = 101,
                                                     double tol = 1e-7) {
    UnionSliceReport report;
    for (const Slice& slice : mixture.slices) {
        auto det = deterministic_optimal(slice.family, slice.dist);
        if (!det.ok()) return det.error();
        auto lopt = solve_optimal(slice.family, slice.dist, l, options);
        if (!lopt.ok()) return lopt.error();
        report.slice_revenues.push_back(lopt->objective);
        report.mixture_revenue += slice.weight * lopt->objective;
        report.slices.push_back(SliceSolution{std::move(*det), std::move(*lopt)});
    }

    for (std::size_t s = 0; s < mixture.slices.size(); ++s) {
        if (mixture.slices[s].weight <= 0.0) continue;  // no such types occur
        const Slice& slice = mixture.slices[s];
        const StepMechanism& own = report.slices[s].l_optimal.mechanism;
        auto grid = detail::verification_grid(slice.family.param_lo(), slice.family.param_hi(),
                                              grid_n, own.thresholds());
        for (double x : grid) {
            const Preference p = slice.family.at(x);
            const double truthful = p.label(own.eval_unchecked(x));
            for (std::size_t o = 0; o < mixture.slices.size(); ++o) {
                if (o == s) continue;
                for (const Bundle& z : report.slices[o].l_optimal.mechanism.bundles()) {
                    const double gap = truthful - p.label(z);
                    if (gap > tol) {
                        report.violations.push_back(
                            CrossSliceViolation{s, o, x, own.eval_unchecked(x), z, gap});
                    }
                }
            }
        }
    }
    report.combined_sp = report.violations.empty();
    return report;
}

}  // namespace scmech
