#include <doctest.h>

#include <cmath>

#include "scmech/demos.hpp"
#include "scmech/optimizer.hpp"
#include "scmech/rng.hpp"
#include "scmech/verifier.hpp"

using namespace scmech;

namespace {

PreferenceFamily lin12() { return PreferenceFamily::linear(1.0, 2.0).value(); }

}  // namespace

TEST_CASE("check_monotone") {
    auto fam = lin12();
    auto dip = dip_view(fam, 1.2, 1.6);
    auto res = check_monotone(dip, 200);
    CHECK_FALSE(res.ok);
    REQUIRE(res.witness.has_value());
    CHECK(res.witness->bundle_a.t > res.witness->bundle_b.t);

    auto mech = StepMechanism::build_from_geometry(fam, {Bundle{0, 0}, Bundle{1.5, 1}}, {1.5})
                    .value();
    CHECK(check_monotone(make_view(mech), 200).ok);
    CHECK(check_monotone(make_view(StepMechanism::constant(fam, Bundle{0, 0}).value()), 50).ok);
}

TEST_CASE("check_local_sp") {
    auto fam = lin12();
    auto mech = StepMechanism::build_from_geometry(fam, {Bundle{0, 0}, Bundle{1.5, 1}}, {1.5})
                    .value();
    CHECK(check_local_sp(mech).ok);

    // threshold pushed off the indifference index, past construction
    auto off = non_indifferent_step(fam, Bundle{0, 0}, Bundle{1.2, 1.0}, 1.5);
    auto res = check_local_sp(off);
    CHECK_FALSE(res.ok);
    CHECK(res.witness.has_value());

    CHECK(check_local_sp(StepMechanism::constant(fam, Bundle{0, 0}).value()).ok);
}

TEST_CASE("check_sp_grid finds the ramp deviation") {
    auto fam = lin12();
    auto ramp = ramp_view(fam);
    auto res = check_sp_grid(ramp, fam, 201, 1e-7, 100000);
    CHECK_FALSE(res.ok);

    // the misreport (true 1.5 -> report 2.0) gains 7/12 in label units
    bool found = false;
    for (const auto& ce : res.counterexamples) {
        if (std::abs(ce.true_index - 1.5) < 1e-12 && std::abs(ce.reported_index - 2.0) < 1e-12) {
            found = true;
            CHECK(ce.utility_gap == doctest::Approx(7.0 / 12.0).epsilon(1e-9));
        }
    }
    CHECK(found);

    auto mech = StepMechanism::build_from_geometry(fam, {Bundle{0, 0}, Bundle{1.5, 1}}, {1.5})
                    .value();
    CHECK(check_sp_grid(make_view(mech), fam, 200).ok);
    CHECK(check_sp_grid(make_view(StepMechanism::constant(fam, Bundle{0, 0}).value()), fam, 50)
              .ok);
}

TEST_CASE("check_ir") {
    auto fam = lin12();
    CHECK(check_ir(ramp_view(fam), fam, 200).ok);

    // charging above the reserve at the top breaks participation
    auto greedy = non_indifferent_step(fam, Bundle{0, 0}, Bundle{2.5, 1.0}, 1.9);
    CHECK_FALSE(check_ir(make_view(greedy), fam, 200).ok);

    CHECK(check_ir(make_view(StepMechanism::constant(fam, Bundle{0, 0}).value()), fam, 50).ok);
}

TEST_CASE("check_indirect_continuity") {
    auto fam = lin12();
    // jump between non-indifferent bundles
    auto off = non_indifferent_step(fam, Bundle{0, 0}, Bundle{1.5, 1.0}, 1.2);
    CHECK_FALSE(check_indirect_continuity(off).ok);
    CHECK_FALSE(check_indirect_continuity(make_view(off), fam, 200).ok);

    auto mech = StepMechanism::build_from_geometry(fam, {Bundle{0, 0}, Bundle{1.5, 1}}, {1.5})
                    .value();
    CHECK(check_indirect_continuity(mech).ok);
    CHECK(check_indirect_continuity(make_view(mech), fam, 200).ok);
    CHECK(check_indirect_continuity(StepMechanism::constant(fam, Bundle{0, 0}).value()).ok);

    // the dip view is continuous in value terms even though not monotone
    CHECK(check_indirect_continuity(dip_view(fam, 1.2, 1.6), fam, 200).ok);
    // the smooth ramp has no jump at all
    CHECK(check_indirect_continuity(ramp_view(fam), fam, 200).ok);
}

TEST_CASE("necessity: failing either axiom implies failing the grid SP check") {
    auto fam = lin12();
    auto dip = dip_view(fam, 1.2, 1.6);
    CHECK_FALSE(check_monotone(dip, 400).ok);
    CHECK_FALSE(check_sp_grid(dip, fam, 400).ok);

    auto off = non_indifferent_step(fam, Bundle{0, 0}, Bundle{1.5, 1.0}, 1.2);
    CHECK_FALSE(check_indirect_continuity(off).ok);
    CHECK_FALSE(check_sp_grid(make_view(off), fam, 400).ok);
}

TEST_CASE("counterexamples replay to positive gaps") {
    auto fam = lin12();
    auto res = check_sp_grid(ramp_view(fam), fam, 101, 1e-7, 50);
    REQUIRE_FALSE(res.ok);
    REQUIRE_FALSE(res.counterexamples.empty());
    auto view = ramp_view(fam);
    for (const auto& ce : res.counterexamples) {
        const Preference p = fam.at(ce.true_index);
        const double gap = p.label(view.at(ce.true_index)) - p.label(view.at(ce.reported_index));
        CHECK(gap > 1e-7);
        CHECK(gap == doctest::Approx(ce.utility_gap).epsilon(1e-12));
    }
}

TEST_CASE("random valid geometries pass the grid SP check") {
    // random diagonal chains with thresholds solved by the indifference chain
    Rng rng(5150);
    auto lin = PreferenceFamily::linear(0.5, 3.0).value();
    auto quad = PreferenceFamily::quadratic_payment(0.5, 3.0).value();
    int built = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const PreferenceFamily& fam = (rep % 2 == 0) ? lin : quad;
        const int cells = 1 + static_cast<int>(rng.below(3));
        std::vector<double> th(cells), q(cells + 1, 0.0);
        double s = fam.param_lo();
        for (int k = 0; k < cells; ++k) {
            s += rng.uniform(0.0, (fam.param_hi() - s) / (cells - k));
            th[k] = s;
        }
        double qq = 0.0;
        for (int k = 1; k <= cells; ++k) {
            qq += rng.uniform(0.05, (1.0 - qq) / (cells - k + 1));
            q[k] = qq;
        }
        auto payments = chain_payments(fam, th, q);
        REQUIRE(payments.ok());
        std::vector<Bundle> bundles;
        for (int k = 0; k <= cells; ++k) bundles.push_back(Bundle{(*payments)[k], q[k]});
        auto mech = StepMechanism::build_from_geometry(fam, bundles, th);
        REQUIRE(mech.ok());
        ++built;
        auto sp = check_sp_grid(make_view(*mech), fam, 100, 1e-7);
        CHECK(sp.ok);
        CHECK(check_ir(make_view(*mech), fam, 100).ok);
    }
    CHECK(built == 60);
}

TEST_CASE("verification report wiring") {
    auto fam = lin12();
    auto mech = StepMechanism::build_from_geometry(fam, {Bundle{0, 0}, Bundle{1.5, 1}}, {1.5})
                    .value();
    auto report = verify_mechanism(mech, 200);
    CHECK(report.monotone);
    CHECK(report.locally_sp);
    CHECK(report.fully_sp);
    CHECK(report.individually_rational);
    CHECK(report.indirect_continuous);
    CHECK(report.all_ok());
    CHECK(report.counterexamples.empty());

    auto bad = verify_view(make_view(non_indifferent_step(fam, Bundle{0, 0}, Bundle{1.5, 1.0},
                                                          1.2)),
                           fam, 200);
    CHECK_FALSE(bad.fully_sp);
    // strategy-proofness implies the axioms: contrapositive on the report
    if (bad.fully_sp) {
        CHECK(bad.monotone);
        CHECK(bad.indirect_continuous);
    }
    for (const auto& ce : bad.counterexamples) CHECK(ce.utility_gap > 1e-7);
}
