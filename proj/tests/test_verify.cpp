#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "pmelab/verify.hpp"

using namespace pmelab;

TEST_CASE("fine-grid audit holds every one-sided bound on a small problem") {
    Grid g = make_grid(2, {9, 9}, {1.0, 1.0});
    ScalarField eps(g, 1.0), gamma(g, 1.0);
    std::vector<double> hs{4.0, 8.0};
    VerifyReport rep = verify_expansion(g, eps, gamma, 2.0, BoundaryField(g, 1.0), hs);
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.all_pass);
    for (const SignChecks& c : rep.checks) {
        CHECK(c.pass);
        CHECK(c.r1_max <= 1e-9 * c.h * c.h);
        CHECK(c.r2_min >= -1e-9 * c.h * c.h);
        CHECK(c.v_min >= -1e-12);
        CHECK(c.n_min >= -1e-12);
        CHECK(c.boundary_defect < 5e-3);
        CHECK(c.flux_balance < 1e-6);
        CHECK(c.r1_norm > 0.0);
        CHECK(c.r2_norm > 0.0);
    }
    // first correction is nonpositive; remainder magnitudes move the right way
    CHECK(rep.v1_max <= 1e-12);
    CHECK(rep.checks[1].r1_norm > rep.checks[0].r1_norm);  // |R1| ~ h^{1/m} grows
    CHECK(rep.checks[1].r2_norm < rep.checks[0].r2_norm);  // |R2| ~ h^{-M} decays
    CHECK(rep.r1_slope > 0.0);
    CHECK(rep.r2_slope < 0.0);
    // the comparison time exists and the stamp sequence was the fine one
    CHECK(rep.sigma > 0.0);
    CHECK(rep.stamp_count > 1000);
    CHECK(rep.w_minus_v_max <= 1e-9);
}
