#include <doctest.h>

#include <cmath>

#include "scmech/optimizer.hpp"
#include "scmech/rng.hpp"

using namespace scmech;

namespace {

PreferenceFamily lin01() { return PreferenceFamily::linear(0.0, 1.0).value(); }
TypeDistribution u01() { return TypeDistribution::uniform(0.0, 1.0).value(); }
PreferenceFamily quad12() { return PreferenceFamily::quadratic_payment(1.0, 2.0).value(); }
TypeDistribution a12() { return TypeDistribution::affine(1.0, 2.0).value(); }

SolveOptions fast_options() {
    SolveOptions opt;
    opt.starts = 16;
    opt.refine_budget = 4000;
    opt.verify_grid = 150;
    return opt;
}

}  // namespace

TEST_CASE("chain_payments") {
    auto lin = PreferenceFamily::linear(0.5, 3.0).value();
    auto t = chain_payments(lin, {1.0}, {0.0, 1.0});
    REQUIRE(t.ok());
    CHECK((*t)[0] == doctest::Approx(0.0));
    CHECK((*t)[1] == doctest::Approx(1.0));

    auto quad = PreferenceFamily::quadratic_payment(0.5, 3.0).value();
    auto tq = chain_payments(quad, {1.0}, {0.0, 1.0});
    REQUIRE(tq.ok());
    CHECK((*tq)[1] == doctest::Approx(1.0));

    auto flat = chain_payments(quad, {1.0}, {0.0, 0.0});
    REQUIRE(flat.ok());
    CHECK((*flat)[1] == 0.0);

    // payments are nondecreasing along any feasible chain
    Rng rng(88);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> th(3), q(4, 0.0);
        double s = 0.5, qq = 0.0;
        for (int k = 0; k < 3; ++k) {
            s += rng.uniform(0.0, 0.5);
            th[k] = std::min(s, 3.0);
            qq = std::min(1.0, qq + rng.uniform(0.0, 0.4));
            q[k + 1] = qq;
        }
        auto pay = chain_payments(quad, th, q);
        REQUIRE(pay.ok());
        for (int k = 1; k <= 3; ++k) CHECK((*pay)[k] >= (*pay)[k - 1]);
    }
}

TEST_CASE("objective") {
    auto lin = PreferenceFamily::linear(1.0, 2.0).value();
    auto u12 = TypeDistribution::uniform(1.0, 2.0).value();
    CHECK(objective(lin, u12, {1.0}, {0.0, 1.0}).value() == doctest::Approx(1.0));

    auto quad = quad12();
    CHECK(objective(quad, a12(), {1.0}, {0.0, 1.0}).value() == doctest::Approx(1.0));

    // a top cell with zero mass earns nothing
    CHECK(objective(lin, u12, {2.0}, {0.0, 1.0}).value() == doctest::Approx(0.0));
}

TEST_CASE("deterministic_optimal") {
    auto sol = deterministic_optimal(lin01(), u01()).value();
    CHECK(sol.thresholds[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.payments[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.objective == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(sol.verification.all_ok());

    auto qsol = deterministic_optimal(quad12(), a12()).value();
    CHECK(qsol.thresholds[0] == doctest::Approx(1.0));
    CHECK(qsol.payments[1] == doctest::Approx(1.0));
    CHECK(qsol.objective == doctest::Approx(1.0));

    auto pw = PreferenceFamily::power_weighted(1.0, 5.0, 0.5, 0.5).value();
    auto psol = deterministic_optimal(pw, TypeDistribution::affine(1.0, 5.0).value()).value();
    CHECK(psol.thresholds[0] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(psol.payments[1] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("solve_optimal quadratic affine l=3") {
    auto sol = solve_optimal(quad12(), a12(), 3, fast_options());
    REQUIRE(sol.ok());
    CHECK(sol->objective == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(sol->mechanism.bundles().size() == 2);
    CHECK(sol->mechanism.thresholds()[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(approx_equal(sol->mechanism.bundles()[0], Bundle{0, 0}, 1e-3));
    CHECK(approx_equal(sol->mechanism.bundles()[1], Bundle{1, 1}, 1e-3));
    CHECK(sol->verification.all_ok());
}

TEST_CASE("solve_optimal linear uniform l=4 stays deterministic") {
    auto sol = solve_optimal(lin01(), u01(), 4, fast_options());
    REQUIRE(sol.ok());
    CHECK(sol->objective == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(sol->mechanism.bundles().size() == 2);
    CHECK(sol->mechanism.thresholds()[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(sol->verification.all_ok());
    REQUIRE_FALSE(sol->foc_residuals.empty());
    for (double r : sol->foc_residuals) CHECK(std::abs(r) <= 1e-4);
}

TEST_CASE("solve_optimal power slice l=2") {
    auto pw = PreferenceFamily::power_weighted(1.0, 5.0, 0.5, 0.5).value();
    auto sol = solve_optimal(pw, TypeDistribution::affine(1.0, 5.0).value(), 2, fast_options());
    REQUIRE(sol.ok());
    CHECK(sol->objective == doctest::Approx(3.125).epsilon(1e-6));
    CHECK(sol->mechanism.thresholds()[0] == doctest::Approx(2.5).epsilon(1e-3));
    CHECK(sol->payments.back() == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("brute_force_oracle") {
    auto sol = brute_force_oracle(lin01(), u01(), 2, GridSpec{101, 101, 10'000'000});
    REQUIRE(sol.ok());
    CHECK(sol->thresholds[0] == doctest::Approx(0.5));
    CHECK(sol->objective == doctest::Approx(0.25));

    // degenerate q-grid {0, 1} reduces to the posted-price scan
    auto coarse_q = brute_force_oracle(lin01(), u01(), 2, GridSpec{101, 2, 10'000'000});
    REQUIRE(coarse_q.ok());
    CHECK(coarse_q->objective == doctest::Approx(0.25));
    CHECK(coarse_q->probabilities[1] == doctest::Approx(1.0));

    auto quad_sol = brute_force_oracle(quad12(), a12(), 3, GridSpec{21, 21, 10'000'000});
    REQUIRE(quad_sol.ok());
    CHECK(quad_sol->objective == doctest::Approx(1.0).epsilon(0.02));

    auto too_big = brute_force_oracle(lin01(), u01(), 6, GridSpec{101, 101, 1'000'000});
    REQUIRE_FALSE(too_big.ok());
    CHECK(too_big.error().code == Errc::grid_too_large);
}

TEST_CASE("solver dominates the oracle grid") {
    for (int l : {2, 3}) {
        auto solver = solve_optimal(lin01(), u01(), l, fast_options());
        auto oracle = brute_force_oracle(lin01(), u01(), l, GridSpec{31, 31, 10'000'000});
        REQUIRE(solver.ok());
        REQUIRE(oracle.ok());
        CHECK(solver->objective >= oracle->objective - 1e-10);
        CHECK(oracle->objective >= solver->objective - 0.02);
    }
}

TEST_CASE("objective bounded by the top reserve and monotone in l") {
    auto fam = quad12();
    const double t_bar = fam.at(2.0).reserve_payment();
    double prev = 0.0;
    for (int l : {2, 3, 4}) {
        auto sol = solve_optimal(fam, a12(), l, fast_options());
        REQUIRE(sol.ok());
        CHECK(sol->objective <= t_bar + 1e-12);
        CHECK(sol->objective >= prev - 1e-9);
        prev = sol->objective;
    }
}

TEST_CASE("foc_residuals") {
    auto lin12 = PreferenceFamily::linear(1.0, 2.0).value();
    auto u12 = TypeDistribution::uniform(1.0, 2.0).value();
    auto det = deterministic_optimal(lin12, u12).value();
    auto res = foc_residuals(det, u12);
    REQUIRE(res.ok());
    REQUIRE(res->size() == 1);
    CHECK((*res)[0] == doctest::Approx(0.0).epsilon(1e-9));

    auto det01 = deterministic_optimal(lin01(), u01()).value();
    auto res01 = foc_residuals(det01, u01());
    REQUIRE(res01.ok());
    CHECK(std::abs((*res01)[0]) <= 1e-6);

    // perturbing the threshold away from the stationary point flips the
    // residual sign with the perturbation direction
    auto above = StepMechanism::build_from_geometry(
                     lin01(), {Bundle{0, 0}, Bundle{0.6, 1}}, {0.6})
                     .value();
    auto ra = foc_residuals(above, u01());
    REQUIRE(ra.ok());
    CHECK((*ra)[0] > 0.1);
    auto below = StepMechanism::build_from_geometry(
                     lin01(), {Bundle{0, 0}, Bundle{0.4, 1}}, {0.4})
                     .value();
    auto rb = foc_residuals(below, u01());
    REQUIRE(rb.ok());
    CHECK((*rb)[0] < -0.1);

    auto unsupported = foc_residuals(deterministic_optimal(quad12(), a12()).value(), a12());
    REQUIRE_FALSE(unsupported.ok());
    CHECK(unsupported.error().code == Errc::family_unsupported);

    auto degen = StepMechanism::from_parts_unchecked(
        lin01(), {Bundle{0.2, 0.0}, Bundle{0.2, 1.0}}, {0.5});
    auto rd = foc_residuals(degen, u01());
    REQUIRE_FALSE(rd.ok());
    CHECK(rd.error().code == Errc::degenerate_cell);
}

TEST_CASE("monotone hazard forces deterministic optima") {
    Rng rng(31337);
    for (int rep = 0; rep < 5; ++rep) {
        const double lo = rng.uniform(0.0, 0.5);
        const double hi = lo + rng.uniform(0.5, 1.5);
        auto fam = PreferenceFamily::linear(lo, hi).value();
        auto dist = (rep % 2 == 0)
                        ? TypeDistribution::uniform(lo, hi).value()
                        : TypeDistribution::truncated_exponential(lo, hi,
                                                                  rng.uniform(0.3, 2.0))
                              .value();
        REQUIRE(dist.is_monotone_hazard(200));
        auto sol = solve_optimal(fam, dist, 4, fast_options());
        REQUIRE(sol.ok());
        CHECK(sol->mechanism.bundles().size() <= 2);
        auto res = foc_residuals(*sol, dist);
        REQUIRE(res.ok());
        const auto& th = sol->mechanism.thresholds();
        for (std::size_t k = 0; k < th.size(); ++k) {
            if (th[k] > lo + 1e-9 && th[k] < hi - 1e-9) CHECK(std::abs((*res)[k]) <= 1e-4);
        }
    }
}

TEST_CASE("union_slice_analysis") {
    auto slice1 = PreferenceFamily::power_weighted(1.0, 5.0, 0.5, 0.5).value();
    auto slice2 = PreferenceFamily::power_weighted(1.0, 5.0, 1.0 / 3.0, 1.0 / 3.0).value();
    auto gamma = TypeDistribution::affine(1.0, 5.0).value();
    auto mix = SliceMixture::make({{slice1, gamma, 0.5}, {slice2, gamma, 0.5}}).value();

    auto report = union_slice_analysis(mix, 2, fast_options());
    REQUIRE(report.ok());
    CHECK(report->slices[0].deterministic.thresholds[0] == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(report->slices[1].deterministic.thresholds[0] == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(report->slices[0].deterministic.payments[1] == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(report->slices[1].deterministic.payments[1] == doctest::Approx(7.5).epsilon(1e-6));
    CHECK(report->slice_revenues[0] == doctest::Approx(3.125).epsilon(1e-6));
    CHECK(report->slice_revenues[1] == doctest::Approx(4.6875).epsilon(1e-6));
    CHECK_FALSE(report->combined_sp);
    CHECK(report->mixture_revenue > report->slice_revenues[0]);
    CHECK(report->mixture_revenue < report->slice_revenues[1]);

    // replay: a type at the shared optimum misreports into the cheap slice
    bool found = false;
    for (const auto& v : report->violations) {
        if (v.true_slice == 1 && std::abs(v.true_index - 2.5) < 1e-3 && v.utility_gap > 1.0) {
            found = true;
            const Preference p = slice2.at(v.true_index);
            CHECK(p.label(v.true_bundle) - p.label(v.deviant_bundle) ==
                  doctest::Approx(v.utility_gap));
        }
    }
    CHECK(found);
    // the deviation replays from scratch at exactly the shared optimum
    const Preference shared = slice2.at(2.5);
    const double gain = shared.label(Bundle{0.0, 0.0}) - shared.label(Bundle{5.0, 1.0});
    CHECK(gain == doctest::Approx(2.5));

    // identical slices cannot be played against each other
    auto same = SliceMixture::make({{slice1, gamma, 0.5}, {slice1, gamma, 0.5}}).value();
    auto symmetric = union_slice_analysis(same, 2, fast_options());
    REQUIRE(symmetric.ok());
    CHECK(symmetric->combined_sp);

    // a zero-weight slice contributes no deviating types
    auto degenerate = SliceMixture::make({{slice1, gamma, 1.0}, {slice2, gamma, 0.0}}).value();
    auto single = union_slice_analysis(degenerate, 2, fast_options());
    REQUIRE(single.ok());
    CHECK(single->mixture_revenue == doctest::Approx(3.125).epsilon(1e-6));
}

TEST_CASE("solve runs on the glued and two-parameter families") {
    auto pw = PreferenceFamily::piecewise_weighting(0.25, 1.0 / 3.0, 2.0, 0.25).value();
    auto pw_dist = TypeDistribution::uniform(0.25, 1.0 / 3.0).value();
    auto sol = solve_optimal(pw, pw_dist, 2, fast_options());
    REQUIRE(sol.ok());
    CHECK(sol->verification.all_ok());
    CHECK(sol->objective <= pw.at(pw.param_hi()).reserve_payment() + 1e-12);
    CHECK(sol->objective >= deterministic_optimal(pw, pw_dist).value().objective - 1e-9);

    auto uv = PreferenceFamily::two_param_uv(0.5, 4.0).value();
    auto uv_dist = TypeDistribution::uniform(0.5, 4.0).value();
    auto sol2 = solve_optimal(uv, uv_dist, 3, fast_options());
    REQUIRE(sol2.ok());
    CHECK(sol2->verification.all_ok());
    CHECK(sol2->objective <= uv.at(4.0).reserve_payment() + 1e-12);
    CHECK(sol2->objective >= deterministic_optimal(uv, uv_dist).value().objective - 1e-9);
}

TEST_CASE("solver stall detection is quiet on healthy runs") {
    SolveOptions opt = fast_options();
    opt.oracle_compare = true;
    opt.oracle_grid = GridSpec{21, 21, 10'000'000};
    auto sol = solve_optimal(lin01(), u01(), 2, opt);
    CHECK(sol.ok());
}
